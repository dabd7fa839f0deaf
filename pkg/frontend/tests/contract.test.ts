/** Endpoint-contract tests: the recorded service responses must satisfy the
 * same validators the app uses at runtime. Regenerate fixtures with
 * `python scripts/record_fixtures.py` after backend changes.
 *
 * When SERVICE_URL is set, the same checks also run against a live service.
 */

import { readFileSync } from "node:fs";
import { join } from "node:path";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";

import {
  assertFrame,
  assertPlanBundle,
  assertSessionCreated,
  assertStatus,
  ContractError,
} from "../src/contract";
import { SENSOR_FIELDS } from "../src/types";

const FIXTURES = fileURLToPath(new URL("./fixtures", import.meta.url));

function fixture(name: string): unknown {
  return JSON.parse(readFileSync(join(FIXTURES, `${name}.json`), "utf-8"));
}

describe("recorded service responses", () => {
  it("POST /sessions payload validates", () => {
    const created = assertSessionCreated(fixture("session_created"));
    expect(created.frame.sensors.vaporizer_pressure).toBe(0.784);
  });

  it("GET /sessions/{id} payload validates", () => {
    const status = assertStatus(fixture("status"));
    expect(status.minutes).toBeGreaterThan(0);
    expect(status.scenario?.magnitude).toBe(1.2);
  });

  it("frames carry exactly the seven documented sensors", () => {
    const trace = fixture("trace") as { frames: unknown[] };
    expect(trace.frames.length).toBeGreaterThan(0);
    for (const raw of trace.frames) {
      const frame = assertFrame(raw);
      expect(Object.keys(frame.sensors).sort()).toEqual([...SENSOR_FIELDS].sort());
    }
  });

  it("frames are strictly time-ordered, one per minute", () => {
    const trace = fixture("trace") as { frames: { t: number }[] };
    const ts = trace.frames.map((f) => f.t);
    for (let i = 1; i < ts.length; i++) {
      expect(ts[i] - ts[i - 1]).toBe(60);
    }
  });

  it("plan bundle after a surge validates and names pc130_sv", () => {
    const bundle = assertPlanBundle(fixture("plan_bundle"));
    expect(bundle.plan?.steps[0].target).toBe("pc130_sv");
    expect(bundle.plan?.steps[0].direction).toBe("dec");
    expect(bundle.diagnosis[0].variable).toBe("fresh_ethylene_feed_pressure");
    expect(bundle.baseline_projection).toHaveLength(30);
    // every rule application cites its source document
    for (const step of bundle.plan!.steps) {
      for (const rule of step.chain) {
        expect(rule.source.length).toBeGreaterThan(0);
      }
    }
  });

  it("plan bundle carries a 30-step schedule when a policy is loaded", () => {
    const bundle = assertPlanBundle(fixture("plan_bundle"));
    expect(bundle.schedule).toHaveLength(30);
    expect(bundle.predicted_pressure).toHaveLength(30);
  });

  it("steady session yields empty deviations and a null plan", () => {
    const bundle = assertPlanBundle(fixture("plan_bundle_steady"));
    expect(bundle.deviations).toEqual([]);
    expect(bundle.plan).toBeNull();
  });

  it("validators reject malformed frames", () => {
    expect(() => assertFrame({ t: 0, sensors: {}, reward_cum: 0 })).toThrow(ContractError);
    expect(() => assertFrame({ t: "x", sensors: null })).toThrow(ContractError);
  });
});

const SERVICE_URL = process.env.SERVICE_URL;

describe.runIf(Boolean(SERVICE_URL))("live service", () => {
  it("create, surge, plan, adopt, teardown all validate", async () => {
    const base = SERVICE_URL!;
    const post = async (path: string, body: unknown) => {
      const resp = await fetch(`${base}${path}`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(body),
      });
      return { status: resp.status, json: await resp.json() };
    };
    const created = assertSessionCreated((await post("/sessions", { speed: 0 })).json);
    const sid = created.session_id;
    await post(`/sessions/${sid}/malfunction`, { kind: "step", magnitude: 1.2 });
    await post(`/sessions/${sid}/clock`, { advance: 2 });
    const bundle = assertPlanBundle((await post(`/sessions/${sid}/plan`, {})).json);
    expect(bundle.plan?.steps[0].target).toBe("pc130_sv");
    const adopt = await post(`/sessions/${sid}/procedure`, { schedule: [0.75, 0.75] });
    expect(adopt.status).toBe(200);
    const bad = await post(`/sessions/${sid}/procedure`, { schedule: [0.95] });
    expect(bad.status).toBe(400);
    await fetch(`${base}/sessions/${sid}`, { method: "DELETE" });
  });
});
