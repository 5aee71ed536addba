// Build the zone-grid visualization model for one count's pitcher policy.
//
// Every pitch type gets a 5x5 grid shaded by aim probability.  Cells of a
// multi-cell corner zone share the zone's shading, but the numeric overlay
// appears once per zone (on its first cell), so the displayed numbers sum
// to the policy mass.

import tables from "./golden/tables.json";
import type { CountSolution, SolutionDoc } from "./types";

const ZONE_CELLS: Record<string, number[][]> = tables.zone_cells;

export interface HeatmapLabel {
  row: number;
  col: number;
  zone: number;
  text: string;
  prob: number;
}

export interface PitchHeatmap {
  pitch: string;
  shade: number[][]; // 5x5 aim probability per cell (zone prob on members)
  labels: HeatmapLabel[];
  mass: number;
}

export interface HeatmapModel {
  count: string;
  value: number;
  batter: { swing: number; take: number };
  pitches: PitchHeatmap[];
  mass: number; // total displayed probability, 1.00 within rounding
}

function emptyGrid(): number[][] {
  return Array.from({ length: 5 }, () => Array(5).fill(0) as number[]);
}

export function policyHeatmap(
  solution: SolutionDoc,
  count: string,
): HeatmapModel | null {
  const entry: CountSolution | undefined = solution.counts[count];
  if (!entry) {
    return null;
  }
  const byPitch = new Map<string, { zone: number; prob: number }[]>();
  for (const item of entry.pitcher_policy) {
    const list = byPitch.get(item.pitch) ?? [];
    list.push({ zone: item.zone, prob: item.prob });
    byPitch.set(item.pitch, list);
  }
  const pitches: PitchHeatmap[] = [];
  let total = 0;
  for (const [pitch, items] of [...byPitch.entries()].sort()) {
    const shade = emptyGrid();
    const labels: HeatmapLabel[] = [];
    let mass = 0;
    for (const { zone, prob } of items) {
      const cells = ZONE_CELLS[String(zone)];
      if (!cells || !cells.length) {
        throw new Error(`policy references unknown zone ${zone}`);
      }
      for (const cell of cells) {
        shade[cell[0]!]![cell[1]!]! += prob;
      }
      const anchor = cells[0]!;
      labels.push({
        row: anchor[0]!,
        col: anchor[1]!,
        zone,
        text: prob.toFixed(2),
        prob,
      });
      mass += prob;
    }
    labels.sort((a, b) => b.prob - a.prob);
    pitches.push({ pitch, shade, labels, mass });
    total += mass;
  }
  return {
    count,
    value: entry.value,
    batter: entry.batter_policy,
    pitches,
    mass: total,
  };
}

export function displayedMass(model: HeatmapModel): number {
  // what the user actually reads: the rounded overlays
  let sum = 0;
  for (const pitch of model.pitches) {
    for (const label of pitch.labels) {
      sum += Number(label.text);
    }
  }
  return sum;
}
