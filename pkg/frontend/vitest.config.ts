import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["tests/**/*.test.ts"],
    // the end-to-end training test runs full epochs on the CPU backend
    testTimeout: 1_800_000,
    hookTimeout: 120_000,
  },
});
