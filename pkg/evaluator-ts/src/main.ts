#!/usr/bin/env node
/**
 * Evaluator child process entry point.
 *
 * Modes:
 *   --mode surrogate   score with the surrogate model (default)
 *   --mode stub        fixed score 1.0; logs each decoded setting to
 *                      stderr. This is the seam where a real trainer
 *                      attaches: replace the stub branch with code that
 *                      builds a model from the validated setting, trains
 *                      with the request seed, and returns the metric.
 *
 * A malformed request produces an error response and the loop keeps
 * serving. Exit code 0 on clean stdin close.
 */

import * as readline from "node:readline";

import { errorLine, parseRequest, readyLine, scoreLine } from "./protocol";
import { score, validateSetting } from "./surrogate";

function parseMode(argv: string[]): "surrogate" | "stub" {
  const i = argv.indexOf("--mode");
  const mode = i >= 0 ? argv[i + 1] : "surrogate";
  if (mode !== "surrogate" && mode !== "stub") {
    process.stderr.write(`unknown mode ${mode}; use surrogate|stub\n`);
    process.exit(2);
  }
  return mode;
}

export function handleLine(line: string, mode: "surrogate" | "stub"): string {
  try {
    const request = parseRequest(line);
    const setting = validateSetting(request.setting);
    if (mode === "stub") {
      process.stderr.write(
        `stub eval trial=${request.trial} repeat=${request.repeat} ` +
          `setting=${JSON.stringify(setting)}\n`
      );
      return scoreLine(1.0);
    }
    return scoreLine(score(setting, BigInt(request.seed)));
  } catch (err) {
    return errorLine(err instanceof Error ? err.message : String(err));
  }
}

function main(): void {
  const mode = parseMode(process.argv.slice(2));
  process.stdout.write(readyLine() + "\n");
  const rl = readline.createInterface({ input: process.stdin, terminal: false });
  rl.on("line", (line) => {
    if (line.trim() === "") {
      return;
    }
    process.stdout.write(handleLine(line, mode) + "\n");
  });
  rl.on("close", () => {
    process.exit(0);
  });
}

if (require.main === module) {
  main();
}
