import { describe, expect, it } from "vitest";

import { formToScenario, validateMalfunctionForm } from "../src/validation";

const valid = { kind: "ramp" as const, magnitudePct: 115, completeMinutes: 15, startMinutes: 10 };

describe("malfunction form validation", () => {
  it("accepts an in-range ramp", () => {
    expect(validateMalfunctionForm(valid)).toEqual({ ok: true, errors: {} });
  });

  it("rejects magnitude above 120%", () => {
    const result = validateMalfunctionForm({ ...valid, magnitudePct: 130 });
    expect(result.ok).toBe(false);
    expect(result.errors.magnitudePct).toMatch(/between 90% and 120%/);
  });

  it("rejects magnitude below 90%", () => {
    expect(validateMalfunctionForm({ ...valid, magnitudePct: 85 }).ok).toBe(false);
  });

  it("rejects completion beyond 30 minutes", () => {
    expect(validateMalfunctionForm({ ...valid, completeMinutes: 31 }).ok).toBe(false);
  });

  it("rejects procedure start beyond 60 minutes", () => {
    expect(validateMalfunctionForm({ ...valid, startMinutes: 61 }).ok).toBe(false);
  });

  it("requires zero completion for a step", () => {
    const result = validateMalfunctionForm({ ...valid, kind: "step", completeMinutes: 5 });
    expect(result.ok).toBe(false);
    expect(result.errors.completeMinutes).toMatch(/step/);
  });

  it("rejects non-numeric input", () => {
    expect(validateMalfunctionForm({ ...valid, magnitudePct: Number("abc") }).ok).toBe(false);
  });
});

describe("form to service payload", () => {
  it("converts percent to multiplier and minutes to seconds", () => {
    expect(formToScenario(valid)).toEqual({
      kind: "ramp",
      magnitude: 1.15,
      t_complete: 900,
      t_procedure_start: 600,
    });
  });

  it("forces t_complete to zero for steps", () => {
    expect(formToScenario({ ...valid, kind: "step", completeMinutes: 0 }).t_complete).toBe(0);
  });
});
