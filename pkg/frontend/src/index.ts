// Client-side access to the depth core. Every call materializes its inputs
// in a temp directory as .npy volumes plus a JSON manifest, drives the
// fuzzdepth CLI on them, and parses the artifacts back into typed arrays.
// No numerics are reimplemented here; determinism and tolerances are the
// core's.

import { mkdirSync, mkdtempSync, readFileSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";

import { CoreError, InputValidationError, runCore } from "./core.js";
import {
  DepthRows,
  formatDepthCsv,
  parseDepthCsv,
  ranksFromDepths,
} from "./depthcsv.js";
import { parseNpy, serializeNpy, Volume } from "./npy.js";

export {
  cellCount,
  NpyFormatError,
  parseNpy,
  serializeNpy,
  volume,
} from "./npy.js";
export type { Volume, VolumeData, VolumeDtype } from "./npy.js";
export {
  DEPTH_CSV_HEADER,
  DepthCsvError,
  formatDepthCsv,
  parseDepthCsv,
  ranksFromDepths,
} from "./depthcsv.js";
export type { DepthRows } from "./depthcsv.js";
export {
  CoreError,
  coreBinary,
  coreVersion,
  FuzzdepthClientError,
  InputValidationError,
  runCore,
} from "./core.js";

export type DepthMethod = "eid" | "pid" | "pid-mean" | "dice" | "iou";

export interface DepthReport {
  ids: string[];
  /** Depth per member, input order. */
  depth: Float64Array;
  /** Dense rank per member, 0 = deepest. */
  rank: Int32Array;
  in_in: Float64Array;
  in_out: Float64Array;
  /** Coefficient of variation of member masses (mean-field diagnostic). */
  cv_mass: number;
  method: string;
}

export interface DepthOptions {
  ids?: string[];
  /** Per-cell quadrature weights on the same grid. */
  weights?: Volume;
  /** Binarization level, required for eid on fuzzy masks. */
  threshold?: number;
  workers?: number;
}

export interface BoxplotBand {
  p: number;
  union: Volume;
  intersection: Volume;
  /** Input indices of the members inside this band. */
  members: number[];
}

export interface BoxplotReport {
  median_index: number;
  bands: BoxplotBand[];
  /** Input indices of flagged outliers, shallowest last. */
  outliers: number[];
}

export interface BoxplotOptions {
  ids?: string[];
  /** Ascending depth percentiles in (0, 1]; default [0.5, 1.0]. */
  percentiles?: number[];
  threshold?: number;
  /** Flag this many lowest-depth members. */
  outliers?: number;
}

function defaultIds(n: number): string[] {
  return Array.from({ length: n }, (_, i) => `m${String(i).padStart(4, "0")}`);
}

function checkMasks(masks: readonly Volume[], ids: string[]): void {
  if (masks.length === 0) {
    throw new InputValidationError("need at least one mask");
  }
  if (ids.length !== masks.length) {
    throw new InputValidationError(
      `${ids.length} ids for ${masks.length} masks`,
    );
  }
  if (new Set(ids).size !== ids.length) {
    throw new InputValidationError("member ids must be unique");
  }
  const dims = masks[0].dims;
  for (let i = 1; i < masks.length; i++) {
    const d = masks[i].dims;
    if (d.length !== dims.length || d.some((x, k) => x !== dims[k])) {
      throw new InputValidationError(
        `mask ${i} has dims [${d}], expected [${dims}]`,
      );
    }
  }
}

interface StagedEnsemble {
  dir: string;
  manifestPath: string;
  ids: string[];
}

function stageEnsemble(
  masks: readonly Volume[],
  ids: string[],
  weights?: Volume,
): StagedEnsemble {
  const dims = masks[0].dims;
  if (weights !== undefined) {
    const d = weights.dims;
    if (d.length !== dims.length || d.some((x, k) => x !== dims[k])) {
      throw new InputValidationError(
        `weights have dims [${d}], expected [${dims}]`,
      );
    }
  }
  const dir = mkdtempSync(join(tmpdir(), "fuzzdepth-client-"));
  try {
    mkdirSync(join(dir, "members"));
    const entries = [];
    for (let i = 0; i < masks.length; i++) {
      const rel = `members/${ids[i]}.npy`;
      writeFileSync(join(dir, rel), serializeNpy(masks[i]));
      entries.push({ id: ids[i], path: rel });
    }
    const grid: Record<string, unknown> = { dims: [...dims] };
    if (weights !== undefined) {
      writeFileSync(join(dir, "weights.npy"), serializeNpy(weights));
      grid.weights_path = "weights.npy";
    }
    const manifestPath = join(dir, "manifest.json");
    writeFileSync(
      manifestPath,
      JSON.stringify({ grid, members: entries }, null, 2) + "\n",
    );
    return { dir, manifestPath, ids };
  } catch (err) {
    rmSync(dir, { recursive: true, force: true });
    throw err;
  }
}

function reportFromRows(rows: DepthRows, cvMass: number): DepthReport {
  return {
    ids: rows.ids,
    depth: rows.depth,
    rank: rows.rank,
    in_in: rows.in_in,
    in_out: rows.in_out,
    cv_mass: cvMass,
    method: rows.method,
  };
}

/**
 * Compute member depths by invoking the core on the given masks.
 *
 * Results come back in input order; ids default to m0000, m0001, ...
 */
export function py_depth(
  masks: readonly Volume[],
  method: DepthMethod,
  opts: DepthOptions = {},
): DepthReport {
  const ids = opts.ids ?? defaultIds(masks.length);
  checkMasks(masks, ids);
  const staged = stageEnsemble(masks, ids, opts.weights);
  try {
    const outPath = join(staged.dir, "depth.csv");
    const args = [
      "depth",
      "--manifest",
      staged.manifestPath,
      "--method",
      method,
      "--out",
      outPath,
    ];
    if (opts.threshold !== undefined) {
      args.push("--threshold", String(opts.threshold));
    }
    if (opts.workers !== undefined) {
      args.push("--workers", String(opts.workers));
    }
    runCore(args);
    const rows = parseDepthCsv(readFileSync(outPath, "utf8"));
    const meta = JSON.parse(readFileSync(outPath + ".json", "utf8")) as {
      cv_mass?: number;
    };
    if (rows.ids.length !== ids.length || rows.ids.some((s, i) => s !== ids[i])) {
      throw new CoreError("core returned rows for unexpected ids", 0, "");
    }
    return reportFromRows(rows, meta.cv_mass ?? 0);
  } finally {
    rmSync(staged.dir, { recursive: true, force: true });
  }
}

interface BoxplotJson {
  median_id: string;
  outlier_ids: string[];
  bands: {
    percentile: number;
    union: string;
    intersection: string;
    member_ids: string[];
  }[];
}

/**
 * Build contour-boxplot envelopes from masks plus known depths.
 *
 * depths is either a per-member array (ranks derived from it) or a full
 * DepthReport from py_depth. Band envelopes come back as 0/1 uint8 volumes.
 */
export function py_boxplot(
  masks: readonly Volume[],
  depths: ArrayLike<number> | DepthReport,
  opts: BoxplotOptions = {},
): BoxplotReport {
  const ids = opts.ids ?? defaultIds(masks.length);
  checkMasks(masks, ids);
  const report = "depth" in (depths as DepthReport) ? (depths as DepthReport) : null;
  const depthArr = report
    ? report.depth
    : Float64Array.from(depths as ArrayLike<number>);
  if (depthArr.length !== masks.length) {
    throw new InputValidationError(
      `${depthArr.length} depths for ${masks.length} masks`,
    );
  }
  const rows: DepthRows = {
    ids,
    in_in: report ? report.in_in : depthArr,
    in_out: report ? report.in_out : depthArr,
    depth: depthArr,
    rank: report ? report.rank : ranksFromDepths(depthArr),
    method: report ? report.method : "external",
  };
  const staged = stageEnsemble(masks, ids);
  try {
    const csvPath = join(staged.dir, "depth.csv");
    writeFileSync(csvPath, formatDepthCsv(rows));
    const outDir = join(staged.dir, "boxplot");
    const args = [
      "boxplot",
      "--manifest",
      staged.manifestPath,
      "--depths",
      csvPath,
      "--out-dir",
      outDir,
    ];
    if (opts.percentiles !== undefined) {
      args.push("--percentiles", opts.percentiles.join(","));
    }
    if (opts.threshold !== undefined) {
      args.push("--threshold", String(opts.threshold));
    }
    if (opts.outliers !== undefined) {
      args.push("--outliers", String(opts.outliers));
    }
    runCore(args);
    const doc = JSON.parse(
      readFileSync(join(outDir, "boxplot.json"), "utf8"),
    ) as BoxplotJson;
    const indexOf = new Map(ids.map((s, i) => [s, i]));
    const lookup = (id: string): number => {
      const i = indexOf.get(id);
      if (i === undefined) {
        throw new CoreError(`core referenced unknown member id ${id}`, 0, "");
      }
      return i;
    };
    return {
      median_index: lookup(doc.median_id),
      outliers: doc.outlier_ids.map(lookup),
      bands: doc.bands.map((b) => ({
        p: b.percentile,
        union: parseNpy(readFileSync(join(outDir, b.union))),
        intersection: parseNpy(readFileSync(join(outDir, b.intersection))),
        members: b.member_ids.map(lookup),
      })),
    };
  } finally {
    rmSync(staged.dir, { recursive: true, force: true });
  }
}
