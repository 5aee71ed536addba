// Matchup view state and the what-if lifecycle.  State transitions are
// pure: a failed request returns the input view with only an error message
// attached, never a mutated solution.

import { ApiError, Client } from "./api";
import type { SolveOverrides, SolveResponse } from "./types";

export const PITCH_TYPES = ["FF", "FT", "FC", "SL", "CU", "CH"];

export interface MatchupView {
  pitcherId: string;
  batterId: string;
  baseline: SolveResponse;
  current: SolveResponse;
  selectedCount: string;
  overrides: SolveOverrides;
  deltas: Record<string, number> | null; // current value - baseline value
  error: string | null;
}

export function newView(baseline: SolveResponse): MatchupView {
  return {
    pitcherId: baseline.pitcher_id,
    batterId: baseline.batter_id,
    baseline,
    current: baseline,
    selectedCount: "0-0",
    overrides: {},
    deltas: null,
    error: null,
  };
}

export function selectCount(view: MatchupView, count: string): MatchupView {
  if (!(count in view.current.solution.counts)) {
    throw new Error(`unknown count ${count}`);
  }
  return { ...view, selectedCount: count };
}

/** Client-side mirror of the server's override validation. */
export function validateOverrides(overrides: SolveOverrides): string | null {
  const excluded = overrides.exclude_pitch_types ?? [];
  for (const pitch of excluded) {
    if (!PITCH_TYPES.includes(pitch)) {
      return `unknown pitch type ${pitch}`;
    }
  }
  if (new Set(excluded).size >= PITCH_TYPES.length) {
    return "at least one pitch type must remain";
  }
  const theta = overrides.patience_threshold;
  if (theta != null && !(theta > 0 && theta < 1)) {
    return "patience threshold must be in (0, 1)";
  }
  const cap = overrides.gamma_cap;
  if (cap != null && !(cap > 0 && cap <= 1)) {
    return "gamma cap must be in (0, 1]";
  }
  const scale = overrides.variance_scale;
  if (scale != null && !(scale > 0)) {
    return "variance scale must be > 0";
  }
  return null;
}

export function computeDeltas(
  baseline: SolveResponse,
  current: SolveResponse,
): Record<string, number> {
  const deltas: Record<string, number> = {};
  for (const [count, entry] of Object.entries(current.solution.counts)) {
    const base = baseline.solution.counts[count];
    if (base) {
      deltas[count] = entry.value - base.value;
    }
  }
  return deltas;
}

export async function applyWhatif(
  view: MatchupView,
  overrides: SolveOverrides,
  client: Client,
): Promise<MatchupView> {
  const invalid = validateOverrides(overrides);
  if (invalid !== null) {
    // no request is issued; the loaded solution stays as-is
    return { ...view, error: invalid };
  }
  try {
    const response = await client.whatif(view.pitcherId, view.batterId, overrides);
    return {
      ...view,
      current: response,
      overrides,
      deltas: computeDeltas(view.baseline, response),
      error: null,
    };
  } catch (err) {
    if (err instanceof ApiError) {
      return { ...view, error: err.message || err.code };
    }
    if (err instanceof Error && err.name === "AbortError") {
      return view; // replaced by a newer request; keep state untouched
    }
    throw err;
  }
}

export function resetWhatif(view: MatchupView): MatchupView {
  return {
    ...view,
    current: view.baseline,
    overrides: {},
    deltas: null,
    error: null,
  };
}
