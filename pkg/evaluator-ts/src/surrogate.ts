/**
 * Surrogate training-cost model; constants and validation mirror the
 * optimizer's built-in evaluator exactly so the two sides score any
 * setting identically (up to libm rounding, far below 1e-9).
 */

import { seededNormal } from "./prng";

export interface Setting {
  n_g: number;
  s_g: number[];
  s_d: number;
  n_f: number;
  s_f: number[];
  a: string | null;
}

export const SURROGATE = {
  floor: 0.6,
  graphDepthWeight: 0.15,
  graphWidthWeight: 0.1,
  denseWeight: 0.05,
  taskDepthWeight: 0.15,
  taskWidthWeight: 0.05,
  activationPenalty: { relu: 0.0, tanh: 0.05, sigmoid: 0.1 } as Record<string, number>,
  noHiddenPenalty: 0.25,
  noiseSd: 0.03,
};

function onGrid(value: unknown, lo: number, hi: number, step: number): boolean {
  return (
    typeof value === "number" &&
    Number.isInteger(value) &&
    value >= lo &&
    value <= hi &&
    (value - lo) % step === 0
  );
}

function checkList(name: string, value: unknown, count: number, lo: number, hi: number, step: number): number[] {
  if (!Array.isArray(value)) {
    throw new Error(`${name}: expected a list`);
  }
  if (value.length !== count) {
    throw new Error(`${name}: list length ${value.length} != controller ${count}`);
  }
  for (const v of value) {
    if (!onGrid(v, lo, hi, step)) {
      throw new Error(`${name}: ${JSON.stringify(v)} outside [${lo}, ${hi}] step ${step}`);
    }
  }
  return value as number[];
}

/** Validate a raw request setting against the GNN space (sentinel allowed). */
export function validateSetting(raw: Record<string, unknown>): Setting {
  const expected = ["n_g", "s_g", "s_d", "n_f", "s_f", "a"];
  for (const key of expected) {
    if (!(key in raw)) {
      throw new Error(`setting missing ${key}`);
    }
  }
  for (const key of Object.keys(raw)) {
    if (!expected.includes(key)) {
      throw new Error(`setting has unknown parameter ${key}`);
    }
  }
  const n_g = raw.n_g;
  if (!onGrid(n_g, 1, 6, 1)) {
    throw new Error(`n_g: ${JSON.stringify(n_g)} outside [1, 6]`);
  }
  const s_g = checkList("s_g", raw.s_g, n_g as number, 32, 512, 32);
  if (!onGrid(raw.s_d, 64, 1024, 64)) {
    throw new Error(`s_d: ${JSON.stringify(raw.s_d)} outside [64, 1024] step 64`);
  }
  const n_f = raw.n_f;
  if (!(n_f === 0 || onGrid(n_f, 1, 6, 1))) {
    throw new Error(`n_f: ${JSON.stringify(n_f)} outside [1, 6] (0 sentinel allowed)`);
  }
  const s_f = checkList("s_f", raw.s_f, n_f as number, 64, 1024, 64);
  const a = raw.a;
  if (n_f === 0) {
    if (a !== null && !(typeof a === "string" && a in SURROGATE.activationPenalty)) {
      throw new Error(`a: ${JSON.stringify(a)} is not an option`);
    }
  } else if (typeof a !== "string" || !(a in SURROGATE.activationPenalty)) {
    throw new Error(`a: ${JSON.stringify(a)} required when n_f >= 1`);
  }
  return {
    n_g: n_g as number,
    s_g,
    s_d: raw.s_d as number,
    n_f: n_f as number,
    s_f,
    a: (a ?? null) as string | null,
  };
}

function mean(values: number[]): number {
  return values.reduce((acc, v) => acc + v, 0) / values.length;
}

export function score(setting: Setting, seed: bigint, noiseFree = false): number {
  const p = SURROGATE;
  let value =
    p.floor +
    (p.graphDepthWeight * Math.abs(setting.n_g - 3)) / 5.0 +
    p.graphWidthWeight * (1.0 - mean(setting.s_g) / 512.0) +
    p.denseWeight * (1.0 - setting.s_d / 1024.0);
  if (setting.n_f === 0) {
    value += p.noHiddenPenalty;
  } else {
    value +=
      (p.taskDepthWeight * Math.abs(setting.n_f - 4)) / 5.0 +
      p.taskWidthWeight * (1.0 - mean(setting.s_f) / 1024.0) +
      p.activationPenalty[setting.a as string];
  }
  if (!noiseFree && p.noiseSd > 0) {
    value += p.noiseSd * seededNormal(seed);
  }
  return value;
}
