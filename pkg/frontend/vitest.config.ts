import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["tests/**/*.test.ts"],
    // parity tests synthesize and depth a 50^3 ensemble through the CLI
    testTimeout: 180_000,
    hookTimeout: 180_000,
  },
});
