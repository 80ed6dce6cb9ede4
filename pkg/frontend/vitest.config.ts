import { defineConfig } from "vitest/config";

// suites shell out to the core CLI (dataset collection takes a while)
export default defineConfig({
  test: {
    testTimeout: 180_000,
    hookTimeout: 180_000,
  },
});
