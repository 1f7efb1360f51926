import { spawnSync } from "node:child_process";
import { mkdtempSync, readFileSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, describe, expect, it } from "vitest";

import { NpyFormatError, parseNpy, serializeNpy, volume } from "../src/index.js";

const tmp = mkdtempSync(join(tmpdir(), "npy-test-"));
afterAll(() => rmSync(tmp, { recursive: true, force: true }));

describe("npy roundtrip", () => {
  it.each([
    ["float32", new Float32Array([0, 0.25, 0.5, 1, 0.125, 0.75])],
    ["float64", new Float64Array([1 / 3, 2 / 3, 1e-300, 1, 0, 5e17])],
    ["uint8", new Uint8Array([0, 1, 255, 7, 128, 64])],
  ] as const)("preserves %s data and dims", (_name, data) => {
    const vol = volume([2, 3], data);
    const back = parseNpy(serializeNpy(vol));
    expect(back.dims).toEqual([2, 3]);
    expect(back.dtype).toBe(vol.dtype);
    expect(Array.from(back.data)).toEqual(Array.from(data));
  });

  it("handles bool masks and 1-d shapes", () => {
    const vol = volume([4], new Uint8Array([1, 0, 1, 1]), "bool");
    const bytes = serializeNpy(vol);
    expect(bytes.toString("latin1")).toContain("'|b1'");
    expect(bytes.toString("latin1")).toContain("(4,)");
    const back = parseNpy(bytes);
    expect(back.dtype).toBe("bool");
    expect(back.dims).toEqual([4]);
  });

  it("aligns the payload to 64 bytes like the reference writer", () => {
    const bytes = serializeNpy(volume([5], new Float64Array(5)));
    const headerLen = bytes.readUInt16LE(8);
    expect((10 + headerLen) % 64).toBe(0);
  });

  it("rejects bad inputs", () => {
    expect(() => volume([3], new Float64Array(2))).toThrow(NpyFormatError);
    expect(() => parseNpy(Buffer.from("not an npy file at all"))).toThrow(
      /bad magic/,
    );
    const fortran = Buffer.from(serializeNpy(volume([2, 2], new Float32Array(4))));
    const patched = Buffer.from(
      fortran.toString("latin1").replace("False", "True "),
      "latin1",
    );
    expect(() => parseNpy(patched)).toThrow(/Fortran/);
    const truncated = serializeNpy(volume([4], new Float32Array(4))).subarray(0, 20);
    expect(() => parseNpy(Buffer.from(truncated))).toThrow(NpyFormatError);
  });
});

describe("npy cross-language", () => {
  const python = (code: string, ...argv: string[]) => {
    const proc = spawnSync("python3", ["-c", code, ...argv], {
      encoding: "utf8",
    });
    expect(proc.status, proc.stderr).toBe(0);
    return proc.stdout.trim();
  };

  it("reference reader accepts our bytes", () => {
    const path = join(tmp, "ours.npy");
    writeFileSync(
      path,
      serializeNpy(volume([2, 2, 2], new Float32Array([1, 2, 3, 4, 5, 6, 7, 8]))),
    );
    const out = python(
      "import numpy, sys; a = numpy.load(sys.argv[1]); " +
        "print(a.dtype, a.shape, a.sum())",
      path,
    );
    expect(out).toBe("float32 (2, 2, 2) 36.0");
  });

  it("we accept reference-written bytes", () => {
    const path = join(tmp, "theirs.npy");
    python(
      "import numpy, sys; " +
        "numpy.save(sys.argv[1], numpy.arange(6, dtype=numpy.float64).reshape(3, 2) / 8)",
      path,
    );
    const vol = parseNpy(readFileSync(path));
    expect(vol.dtype).toBe("float64");
    expect(vol.dims).toEqual([3, 2]);
    expect(Array.from(vol.data)).toEqual([0, 0.125, 0.25, 0.375, 0.5, 0.625]);
  });
});
