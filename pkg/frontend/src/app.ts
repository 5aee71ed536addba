// DOM wiring for the matchup explorer: pick a matchup, browse per-count
// equilibrium heatmaps, run what-if re-solves, and call pitches through a
// live at-bat.  All numbers come from the service; this file only renders.

import { Client } from "./api";
import {
  AtBatEvent, AtBatSession, EVENTS, advanceSession, newSession,
} from "./countMachine";
import { HeatmapModel, policyHeatmap } from "./heatmap";
import tables from "./golden/tables.json";
import type { SolveOverrides } from "./types";
import {
  MatchupView, PITCH_TYPES, applyWhatif, newView, resetWhatif, selectCount,
} from "./view";

const client = new Client("");

let view: MatchupView | null = null;
let session: AtBatSession = newSession();

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

function shadeColor(p: number): string {
  const alpha = Math.min(1, p * 1.6);
  return `rgba(214, 93, 14, ${alpha.toFixed(3)})`;
}

function renderHeatmap(model: HeatmapModel | null): void {
  const host = el<HTMLDivElement>("heatmaps");
  host.innerHTML = "";
  if (!model) {
    host.textContent = "No solution loaded for this count.";
    return;
  }
  el<HTMLSpanElement>("count-value").textContent =
    `${model.count}: OBP ${model.value.toFixed(4)} | batter swing ` +
    `${model.batter.swing.toFixed(2)} / take ${model.batter.take.toFixed(2)}`;
  for (const pitch of model.pitches) {
    const box = document.createElement("div");
    box.className = "pitch-box";
    const title = document.createElement("h4");
    title.textContent = `${pitch.pitch} (${pitch.mass.toFixed(2)})`;
    box.appendChild(title);
    const table = document.createElement("table");
    table.className = "zone-grid";
    for (let row = 0; row < 5; row += 1) {
      const tr = document.createElement("tr");
      for (let col = 0; col < 5; col += 1) {
        const td = document.createElement("td");
        const prob = pitch.shade[row]![col]!;
        td.style.backgroundColor = shadeColor(prob);
        const label = pitch.labels.find((l) => l.row === row && l.col === col);
        if (label) td.textContent = label.text;
        if (row >= 1 && row <= 3 && col >= 1 && col <= 3) {
          td.classList.add("strike-zone");
        }
        tr.appendChild(td);
      }
      table.appendChild(tr);
    }
    box.appendChild(table);
    host.appendChild(box);
  }
}

function renderCounts(): void {
  const host = el<HTMLDivElement>("counts");
  host.innerHTML = "";
  if (!view) return;
  for (const count of tables.counts as string[]) {
    const button = document.createElement("button");
    const entry = view.current.solution.counts[count];
    const delta = view.deltas?.[count];
    button.textContent = entry
      ? `${count} (${entry.value.toFixed(3)}` +
        (delta !== undefined
          ? `, ${delta >= 0 ? "+" : ""}${delta.toFixed(3)})`
          : ")")
      : count;
    if (count === view.selectedCount) button.classList.add("selected");
    button.onclick = () => {
      if (!view) return;
      view = selectCount(view, count);
      render();
    };
    host.appendChild(button);
  }
}

function renderSession(): void {
  el<HTMLSpanElement>("session-state").textContent = session.terminal
    ? `at-bat over: ${session.terminal.replace("_", " ")}`
    : `count ${session.count}`;
  el<HTMLDivElement>("session-log").textContent =
    session.log.length ? session.log.join(" > ") : "(no pitches yet)";
  const host = el<HTMLDivElement>("session-mixture");
  host.innerHTML = "";
  if (!view || session.terminal) return;
  const entry = view.current.solution.counts[session.count];
  if (!entry) return;
  const list = document.createElement("ul");
  for (const item of [...entry.pitcher_policy].sort((a, b) => b.prob - a.prob)) {
    const li = document.createElement("li");
    li.textContent = `${item.pitch} -> zone ${item.zone}: ${item.prob.toFixed(3)}`;
    list.appendChild(li);
  }
  host.appendChild(list);
}

function render(): void {
  el<HTMLDivElement>("error").textContent = view?.error ?? "";
  renderCounts();
  renderHeatmap(view ? policyHeatmap(view.current.solution, view.selectedCount) : null);
  renderSession();
}

function overridesFromForm(): SolveOverrides {
  const overrides: SolveOverrides = {};
  const excluded = PITCH_TYPES.filter(
    (p) => el<HTMLInputElement>(`exclude-${p}`).checked);
  if (excluded.length) overrides.exclude_pitch_types = excluded;
  const theta = el<HTMLInputElement>("theta").value;
  if (theta) overrides.patience_threshold = Number(theta);
  const cap = el<HTMLInputElement>("gamma-cap").value;
  if (cap) overrides.gamma_cap = Number(cap);
  const scale = el<HTMLInputElement>("variance-scale").value;
  if (scale) overrides.variance_scale = Number(scale);
  return overrides;
}

async function loadMatchup(): Promise<void> {
  const pitcher = el<HTMLSelectElement>("pitcher").value;
  const batter = el<HTMLSelectElement>("batter").value;
  el<HTMLDivElement>("error").textContent = "solving...";
  try {
    const response = await client.solve(pitcher, batter);
    view = newView(response);
    session = newSession();
    render();
  } catch (err) {
    el<HTMLDivElement>("error").textContent = String(err);
  }
}

async function boot(): Promise<void> {
  const players = await client.players();
  const pitcherSel = el<HTMLSelectElement>("pitcher");
  const batterSel = el<HTMLSelectElement>("batter");
  for (const p of players.pitchers) {
    pitcherSel.appendChild(new Option(p.id, p.id));
  }
  for (const b of players.batters) {
    batterSel.appendChild(new Option(b.id, b.id));
  }
  el<HTMLButtonElement>("load").onclick = () => void loadMatchup();

  const excludeHost = el<HTMLDivElement>("exclude-boxes");
  for (const pitch of PITCH_TYPES) {
    const label = document.createElement("label");
    const box = document.createElement("input");
    box.type = "checkbox";
    box.id = `exclude-${pitch}`;
    label.appendChild(box);
    label.appendChild(document.createTextNode(pitch));
    excludeHost.appendChild(label);
  }
  el<HTMLButtonElement>("whatif").onclick = async () => {
    if (!view) return;
    view = await applyWhatif(view, overridesFromForm(), client);
    render();
  };
  el<HTMLButtonElement>("whatif-reset").onclick = () => {
    if (!view) return;
    view = resetWhatif(view);
    render();
  };

  const eventHost = el<HTMLDivElement>("event-buttons");
  for (const event of EVENTS) {
    const button = document.createElement("button");
    button.textContent = event.replace("_", " ");
    button.onclick = () => {
      try {
        session = advanceSession(session, event as AtBatEvent);
      } catch (err) {
        el<HTMLDivElement>("error").textContent = String(err);
        return;
      }
      renderSession();
    };
    eventHost.appendChild(button);
  }
  el<HTMLButtonElement>("session-reset").onclick = () => {
    session = newSession();
    renderSession();
  };
}

if (typeof document !== "undefined") {
  void boot();
}
