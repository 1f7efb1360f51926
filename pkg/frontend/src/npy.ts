// Minimal .npy container support: C-order little-endian arrays of the
// dtypes the depth pipeline actually exchanges (float32/float64 volumes,
// uint8/bool masks). Format versions 1.0 and 2.0 are read; 1.0 is written.

export type VolumeDtype = "float32" | "float64" | "uint8" | "bool";

export type VolumeData = Float32Array | Float64Array | Uint8Array;

export interface Volume {
  /** Grid shape; data is flat in row-major (C) order. */
  dims: readonly number[];
  dtype: VolumeDtype;
  data: VolumeData;
}

export class NpyFormatError extends Error {}

const MAGIC = Buffer.from("\x93NUMPY", "latin1");

const DESCR_TO_DTYPE: Record<string, VolumeDtype> = {
  "<f4": "float32",
  "<f8": "float64",
  "|u1": "uint8",
  "|b1": "bool",
};

const DTYPE_TO_DESCR: Record<VolumeDtype, string> = {
  float32: "<f4",
  float64: "<f8",
  uint8: "|u1",
  bool: "|b1",
};

export function cellCount(dims: readonly number[]): number {
  return dims.reduce((acc, d) => acc * d, 1);
}

/** Build a Volume, copying plain number arrays into a Float64Array. */
export function volume(
  dims: readonly number[],
  data: ArrayLike<number> | VolumeData,
  dtype?: VolumeDtype,
): Volume {
  let typed: VolumeData;
  if (
    data instanceof Float32Array ||
    data instanceof Float64Array ||
    data instanceof Uint8Array
  ) {
    typed = data;
  } else {
    typed = Float64Array.from(data as ArrayLike<number>);
  }
  const resolved =
    dtype ??
    (typed instanceof Float32Array
      ? "float32"
      : typed instanceof Float64Array
        ? "float64"
        : "uint8");
  if (typed.length !== cellCount(dims)) {
    throw new NpyFormatError(
      `data has ${typed.length} cells, dims [${dims}] expect ${cellCount(dims)}`,
    );
  }
  return { dims: [...dims], dtype: resolved, data: typed };
}

/** Parse an in-memory .npy file. Rejects Fortran order and exotic dtypes. */
export function parseNpy(buf: Buffer): Volume {
  if (buf.length < 10 || !buf.subarray(0, 6).equals(MAGIC)) {
    throw new NpyFormatError("not an npy file: bad magic");
  }
  const major = buf[2 + 4];
  let headerLen: number;
  let offset: number;
  if (major === 1) {
    headerLen = buf.readUInt16LE(8);
    offset = 10;
  } else if (major === 2) {
    headerLen = buf.readUInt32LE(8);
    offset = 12;
  } else {
    throw new NpyFormatError(`unsupported npy version ${major}`);
  }
  const header = buf.subarray(offset, offset + headerLen).toString("latin1");
  const descr = /'descr':\s*'([^']+)'/.exec(header)?.[1];
  const fortran = /'fortran_order':\s*(True|False)/.exec(header)?.[1];
  const shapeTxt = /'shape':\s*\(([^)]*)\)/.exec(header)?.[1];
  if (descr === undefined || fortran === undefined || shapeTxt === undefined) {
    throw new NpyFormatError(`malformed npy header: ${header.trim()}`);
  }
  if (fortran === "True") {
    throw new NpyFormatError("Fortran-order volumes are not supported");
  }
  const dtype = DESCR_TO_DTYPE[descr];
  if (dtype === undefined) {
    throw new NpyFormatError(`unsupported npy dtype ${descr}`);
  }
  const dims = shapeTxt
    .split(",")
    .map((s) => s.trim())
    .filter((s) => s.length > 0)
    .map(Number);
  if (dims.length === 0) {
    throw new NpyFormatError("0-d volumes are not supported");
  }
  if (dims.some((d) => !Number.isInteger(d) || d < 1)) {
    throw new NpyFormatError(`bad shape (${shapeTxt})`);
  }
  const n = cellCount(dims);
  const itemsize = dtype === "float64" ? 8 : dtype === "float32" ? 4 : 1;
  const payload = buf.subarray(offset + headerLen);
  if (payload.length !== n * itemsize) {
    throw new NpyFormatError(
      `payload is ${payload.length} bytes, shape (${shapeTxt}) ` +
        `with ${descr} expects ${n * itemsize}`,
    );
  }
  // copy to a fresh buffer so the typed-array view is always aligned
  const bytes = payload.buffer.slice(
    payload.byteOffset,
    payload.byteOffset + payload.byteLength,
  );
  const data: VolumeData =
    dtype === "float64"
      ? new Float64Array(bytes)
      : dtype === "float32"
        ? new Float32Array(bytes)
        : new Uint8Array(bytes);
  return { dims, dtype, data };
}

/** Serialize a Volume as npy v1.0, matching numpy's own header layout. */
export function serializeNpy(vol: Volume): Buffer {
  if (vol.data.length !== cellCount(vol.dims)) {
    throw new NpyFormatError(
      `data has ${vol.data.length} cells, dims [${vol.dims}] ` +
        `expect ${cellCount(vol.dims)}`,
    );
  }
  const descr = DTYPE_TO_DESCR[vol.dtype];
  const shapeTxt =
    vol.dims.length === 1 ? `${vol.dims[0]},` : vol.dims.join(", ");
  let header = `{'descr': '${descr}', 'fortran_order': False, 'shape': (${shapeTxt}), }`;
  // numpy pads the header so the payload starts 64-byte aligned
  const unpadded = 10 + header.length + 1;
  header = header + " ".repeat((64 - (unpadded % 64)) % 64) + "\n";
  const head = Buffer.alloc(10);
  MAGIC.copy(head);
  head[6] = 1;
  head[7] = 0;
  head.writeUInt16LE(header.length, 8);
  const payload = Buffer.from(
    vol.data.buffer,
    vol.data.byteOffset,
    vol.data.byteLength,
  );
  return Buffer.concat([head, Buffer.from(header, "latin1"), payload]);
}
