/**
 * Wire protocol: one JSON object per line over stdin/stdout.
 *
 *   child -> {"type": "ready", "protocol": 1}          once, on startup
 *   parent -> {"type": "eval", "trial": t, "repeat": r,
 *              "seed": s, "setting": {...}}
 *   child -> {"type": "score", "value": v}             scores use 17
 *   child -> {"type": "error", "message": m}           significant digits
 *
 * Seeds must be integers below 2^53 so they survive JSON number parsing
 * exactly; the optimizer's seed derivation guarantees that.
 */

export const PROTOCOL_VERSION = 1;

export interface EvalRequest {
  type: "eval";
  trial: number;
  repeat: number;
  seed: number;
  setting: Record<string, unknown>;
}

export function readyLine(): string {
  return `{"type":"ready","protocol":${PROTOCOL_VERSION}}`;
}

export function parseRequest(line: string): EvalRequest {
  let parsed: unknown;
  try {
    parsed = JSON.parse(line);
  } catch {
    throw new Error(`malformed request line: ${JSON.stringify(line)}`);
  }
  const req = parsed as Record<string, unknown>;
  if (req === null || typeof req !== "object" || req.type !== "eval") {
    throw new Error(`unsupported request: ${JSON.stringify(line)}`);
  }
  for (const field of ["trial", "repeat", "seed"]) {
    const v = req[field];
    if (typeof v !== "number" || !Number.isInteger(v)) {
      throw new Error(`request field ${field} must be an integer`);
    }
  }
  if (req.setting === null || typeof req.setting !== "object" || Array.isArray(req.setting)) {
    throw new Error("request field setting must be an object");
  }
  return req as unknown as EvalRequest;
}

/** Score line with the value at 17 significant digits (exact round trip). */
export function scoreLine(value: number): string {
  return `{"type":"score","value":${value.toPrecision(17)}}`;
}

export function errorLine(message: string): string {
  return JSON.stringify({ type: "error", message });
}
