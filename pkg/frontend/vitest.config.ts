import { defineConfig } from 'vitest/config';

export default defineConfig({
  test: {
    include: ['tests/**/*.test.ts'],
    environment: 'node',
    // the end-to-end file drives a live search service; give it room
    testTimeout: 120_000,
    hookTimeout: 60_000,
  },
});
