// Depth CSV exchange format: one row per member in ensemble order, with
// the dense rank (0 = deepest) the core assigns.

export const DEPTH_CSV_HEADER = "id,in_in,in_out,depth,rank,method";

export interface DepthRows {
  ids: string[];
  in_in: Float64Array;
  in_out: Float64Array;
  depth: Float64Array;
  rank: Int32Array;
  method: string;
}

export class DepthCsvError extends Error {}

export function parseDepthCsv(text: string): DepthRows {
  const lines = text.split(/\r?\n/).filter((l) => l.length > 0);
  if (lines.length === 0 || lines[0] !== DEPTH_CSV_HEADER) {
    throw new DepthCsvError(
      `expected header "${DEPTH_CSV_HEADER}", got "${lines[0] ?? ""}"`,
    );
  }
  const n = lines.length - 1;
  if (n === 0) throw new DepthCsvError("depth CSV has no rows");
  const out: DepthRows = {
    ids: new Array<string>(n),
    in_in: new Float64Array(n),
    in_out: new Float64Array(n),
    depth: new Float64Array(n),
    rank: new Int32Array(n),
    method: "",
  };
  const methods = new Set<string>();
  for (let i = 0; i < n; i++) {
    const parts = lines[i + 1].split(",");
    if (parts.length !== 6) {
      throw new DepthCsvError(`row ${i + 1} has ${parts.length} fields`);
    }
    const [id, inIn, inOut, depth, rank, method] = parts;
    out.ids[i] = id;
    out.in_in[i] = Number(inIn);
    out.in_out[i] = Number(inOut);
    out.depth[i] = Number(depth);
    out.rank[i] = Number(rank);
    methods.add(method);
    if (
      Number.isNaN(out.depth[i]) ||
      Number.isNaN(out.in_in[i]) ||
      Number.isNaN(out.in_out[i]) ||
      !Number.isInteger(out.rank[i])
    ) {
      throw new DepthCsvError(`row ${i + 1} has non-numeric fields`);
    }
  }
  out.method = methods.size === 1 ? [...methods][0] : "mixed";
  return out;
}

/** Dense ranks, 0 = deepest; ties broken by ascending member index. */
export function ranksFromDepths(depth: ArrayLike<number>): Int32Array {
  const n = depth.length;
  const order = Array.from({ length: n }, (_, i) => i);
  order.sort((a, b) => depth[b] - depth[a] || a - b);
  const rank = new Int32Array(n);
  for (let k = 0; k < n; k++) rank[order[k]] = k;
  return rank;
}

export function formatDepthCsv(rows: DepthRows): string {
  const lines = [DEPTH_CSV_HEADER];
  for (let i = 0; i < rows.ids.length; i++) {
    // JS number-to-string is shortest round-trip, same as the core's output
    lines.push(
      [
        rows.ids[i],
        rows.in_in[i],
        rows.in_out[i],
        rows.depth[i],
        rows.rank[i],
        rows.method,
      ].join(","),
    );
  }
  return lines.join("\n") + "\n";
}
