import { describe, expect, it } from "vitest";

import tables from "../src/golden/tables.json";
import {
  AtBatEvent, EVENTS, advanceSession, newSession, transition,
} from "../src/countMachine";

const golden = tables.transitions as Record<string, Record<string, string>>;

describe("count machine vs golden table", () => {
  it("matches the engine's exported transitions on every (count, event) pair", () => {
    for (const count of tables.counts as string[]) {
      for (const event of EVENTS) {
        expect(transition(count, event), `${count} + ${event}`)
          .toBe(golden[count]![event]);
      }
    }
  });

  it("covers 12 counts x 6 events", () => {
    expect((tables.counts as string[]).length).toBe(12);
    expect(EVENTS.length).toBe(6);
  });
});

describe("session stepping", () => {
  it("walks a full at-bat", () => {
    let s = newSession();
    s = advanceSession(s, "ball");
    expect(s.count).toBe("1-0");
    s = advanceSession(s, "called_strike");
    expect(s.count).toBe("1-1");
    s = advanceSession(s, "foul");
    expect(s.count).toBe("1-2");
    s = advanceSession(s, "foul");
    expect(s.count).toBe("1-2"); // fouls never advance two strikes
    s = advanceSession(s, "whiff");
    expect(s.terminal).toBe("out");
    expect(s.log).toEqual(["ball", "called_strike", "foul", "foul", "whiff"]);
  });

  it("3-2 foul self-loops", () => {
    let s = newSession();
    for (const event of ["ball", "ball", "ball", "called_strike",
                         "called_strike"] as AtBatEvent[]) {
      s = advanceSession(s, event);
    }
    expect(s.count).toBe("3-2");
    s = advanceSession(s, "foul");
    expect(s.count).toBe("3-2");
    s = advanceSession(s, "ball");
    expect(s.terminal).toBe("on_base");
  });

  it("0-2 whiff is out; 3-1 ball is on base; hit ends it", () => {
    let s = newSession();
    s = advanceSession(s, "whiff");
    s = advanceSession(s, "whiff");
    expect(s.count).toBe("0-2");
    s = advanceSession(s, "whiff");
    expect(s.terminal).toBe("out");

    s = newSession();
    for (const event of ["ball", "ball", "ball", "called_strike"] as AtBatEvent[]) {
      s = advanceSession(s, event);
    }
    expect(s.count).toBe("3-1");
    s = advanceSession(s, "ball");
    expect(s.terminal).toBe("on_base");

    s = newSession();
    s = advanceSession(s, "hit");
    expect(s.terminal).toBe("on_base");
  });

  it("rejects events after the at-bat ends", () => {
    let s = newSession();
    s = advanceSession(s, "out_in_play");
    expect(s.terminal).toBe("out");
    expect(() => advanceSession(s, "ball")).toThrow(/no events accepted/);
  });
});
