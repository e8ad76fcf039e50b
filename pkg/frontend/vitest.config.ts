import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "node",
    include: ["tests/**/*.test.ts"],
    // The live-server test boots the Python service and drives a full
    // session against it.
    testTimeout: 60_000,
    hookTimeout: 60_000,
  },
});
