/** Criteria panel: payload round-trip and client-side validation. */

import { describe, expect, it } from "vitest";
import { readFileSync } from "node:fs";
import { join } from "node:path";

import {
  buildCriteriaPayload,
  initialCriteria,
  setAssortmentThreshold,
  setPeriodOverride,
  validateThreshold,
} from "../src/criteria.js";
import { ApiClient } from "../src/api.js";
import { CriteriaResponse } from "../src/types.js";

const FIXTURES = join(__dirname, "fixtures");

function fixture<T>(name: string): T {
  return JSON.parse(readFileSync(join(FIXTURES, `${name}.json`), "utf-8")) as T;
}

describe("criteria state", () => {
  it("round-trips the 30/20/30 percent setting", () => {
    let state = initialCriteria(3);
    state = setAssortmentThreshold(state, 0, 0.3);
    state = setAssortmentThreshold(state, 1, 0.2);
    state = setAssortmentThreshold(state, 2, 0.3);
    expect(buildCriteriaPayload(state)).toEqual({
      thresholds: [0.3, 0.2, 0.3],
      mode: "fraction",
      strict: true,
    });
  });

  it("per-period overrides expand to a full grid", () => {
    let state = initialCriteria(2);
    state = setAssortmentThreshold(state, 0, 0.4);
    state = setPeriodOverride(state, 1, 3, 0.1, 4);
    const payload = buildCriteriaPayload(state);
    expect(payload.thresholds).toEqual([
      [0.4, 0.4, 0.1, 0.4],
      [0.3, 0.3, 0.3, 0.3],
    ]);
  });

  it("rejects negative input client-side", () => {
    expect(validateThreshold(-0.1).ok).toBe(false);
    expect(validateThreshold(Number.NaN).ok).toBe(false);
    expect(() => setAssortmentThreshold(initialCriteria(1), 0, -1)).toThrow();
  });
});

describe("criteria commit against recorded service responses", () => {
  it("re-renders scores exactly as returned", async () => {
    const recorded = fixture<CriteriaResponse>("criteria_302030");
    const fakeFetch = (async (url: RequestInfo | URL, init?: RequestInit) => {
      expect(String(url)).toContain("/criteria");
      expect(init?.method).toBe("PUT");
      const body = JSON.parse(String(init?.body));
      expect(body.thresholds).toEqual([0.3, 0.2, 0.3]);
      return new Response(JSON.stringify(recorded), { status: 200 });
    }) as typeof fetch;

    const client = new ApiClient("", fakeFetch);
    let state = initialCriteria(3);
    state = setAssortmentThreshold(state, 1, 0.2);
    const response = await client.setCriteria(
      recorded.session,
      buildCriteriaPayload(state)
    );
    expect(response.scores.length).toBe(109);
    expect(response).toEqual(recorded);
    // every score is a valid fraction and a multiple of 1/N
    const n = response.n_scenarios;
    for (const s of response.scores) {
      for (const row of s.robustness) {
        for (const v of row) {
          expect(v).toBeGreaterThanOrEqual(0);
          expect(v).toBeLessThanOrEqual(1);
          expect(Math.abs(v * n - Math.round(v * n))).toBeLessThan(1e-9);
        }
      }
    }
  });

  it("surfaces service errors inline", async () => {
    const fakeFetch = (async () =>
      new Response(JSON.stringify({ detail: "threshold must be >= 0" }), {
        status: 400,
      })) as typeof fetch;
    const client = new ApiClient("", fakeFetch);
    await expect(
      client.setCriteria("s", { thresholds: [0.1], mode: "fraction", strict: true })
    ).rejects.toThrow("threshold must be >= 0");
  });
});
