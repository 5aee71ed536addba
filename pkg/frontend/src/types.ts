// Wire types for the solve service's JSON API.

export interface PolicyEntry {
  pitch: string;
  zone: number;
  prob: number;
}

export interface CountSolution {
  value: number;
  pitcher_policy: PolicyEntry[];
  batter_policy: { swing: number; take: number };
}

export interface SolutionDoc {
  counts: Record<string, CountSolution>;
}

export interface SolveOverrides {
  exclude_pitch_types?: string[];
  patience_threshold?: number | null;
  gamma_cap?: number | null;
  variance_scale?: number | null;
}

export interface SolveResponse {
  pitcher_id: string;
  batter_id: string;
  overrides: SolveOverrides;
  solution: SolutionDoc;
  provenance: Record<string, unknown>;
  solve_ms?: number;
}

export interface PlayerEntry {
  id: string;
  control?: Record<string, string>;
}

export interface PlayersResponse {
  pitchers: PlayerEntry[];
  batters: PlayerEntry[];
}

export interface ApiErrorBody {
  error: string;
  message: string;
}
