import { spawnSync } from "node:child_process";

/** Base class for everything this client throws. */
export class FuzzdepthClientError extends Error {}

/** Input rejected before the core was ever invoked. */
export class InputValidationError extends FuzzdepthClientError {}

/** The core CLI exited nonzero; message carries its stderr diagnostics. */
export class CoreError extends FuzzdepthClientError {
  constructor(
    message: string,
    readonly exitCode: number,
    readonly stderr: string,
  ) {
    super(message);
  }
}

/** Resolve the core executable; override with FUZZDEPTH_BIN. */
export function coreBinary(): string {
  return process.env.FUZZDEPTH_BIN ?? "fuzzdepth";
}

export function runCore(args: string[]): string {
  const bin = coreBinary();
  const proc = spawnSync(bin, args, {
    encoding: "utf8",
    maxBuffer: 64 * 1024 * 1024,
  });
  if (proc.error !== undefined) {
    throw new FuzzdepthClientError(
      `cannot run ${bin}: ${proc.error.message} ` +
        "(is the core installed and on PATH, or FUZZDEPTH_BIN set?)",
    );
  }
  if (proc.status !== 0) {
    const stderr = (proc.stderr ?? "").trim();
    throw new CoreError(
      `${bin} ${args[0]} failed (exit ${proc.status}): ${stderr}`,
      proc.status ?? -1,
      stderr,
    );
  }
  return proc.stdout;
}

/** Core version string, e.g. "fuzzdepth 0.1.0"; provenance for results. */
export function coreVersion(): string {
  return runCore(["--version"]).trim();
}
