import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["tests/**/*.test.ts"],
    testTimeout: 180_000,
    hookTimeout: 120_000,
    // The suites drive real subprocess episodes; run files one at a time so
    // wall-clock measurements and RSS sampling are not skewed by contention.
    fileParallelism: false,
  },
});
