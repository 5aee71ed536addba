// The at-bat count machine for the live pitch-calling session.
//
// Transitions follow the game rules (balls walk at four, strikes fan at
// three, a foul at two strikes holds the count); the test suite checks every
// (count, event) pair against the golden table exported by the solver
// backend, so this file can never drift from the engine.

export type AtBatEvent =
  | "ball"
  | "called_strike"
  | "whiff"
  | "foul"
  | "hit"
  | "out_in_play";

export const EVENTS: AtBatEvent[] = [
  "ball", "called_strike", "whiff", "foul", "hit", "out_in_play",
];

export type Terminal = "on_base" | "out";

export interface AtBatSession {
  count: string; // "balls-strikes"
  log: AtBatEvent[];
  terminal: Terminal | null;
}

export function newSession(): AtBatSession {
  return { count: "0-0", log: [], terminal: null };
}

export function parseCount(count: string): { balls: number; strikes: number } {
  const parts = count.split("-");
  const balls = Number(parts[0]);
  const strikes = Number(parts[1]);
  if (!(balls >= 0 && balls <= 3 && strikes >= 0 && strikes <= 2)) {
    throw new Error(`invalid count ${count}`);
  }
  return { balls, strikes };
}

export function transition(count: string, event: AtBatEvent): string | Terminal {
  const { balls, strikes } = parseCount(count);
  switch (event) {
    case "ball":
      return balls === 3 ? "on_base" : `${balls + 1}-${strikes}`;
    case "called_strike":
    case "whiff":
      return strikes === 2 ? "out" : `${balls}-${strikes + 1}`;
    case "foul":
      return strikes === 2 ? count : `${balls}-${strikes + 1}`;
    case "hit":
      return "on_base";
    case "out_in_play":
      return "out";
  }
}

export function advanceSession(session: AtBatSession, event: AtBatEvent): AtBatSession {
  if (session.terminal !== null) {
    throw new Error(`at-bat is over (${session.terminal}); no events accepted`);
  }
  const next = transition(session.count, event);
  const log = [...session.log, event];
  if (next === "on_base" || next === "out") {
    return { count: session.count, log, terminal: next };
  }
  return { count: next, log, terminal: null };
}
