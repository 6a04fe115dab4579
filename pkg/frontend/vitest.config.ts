import { defineConfig } from 'vitest/config'

export default defineConfig({
  test: {
    include: ['tests/**/*.test.ts'],
    testTimeout: 30000,
    hookTimeout: 60000,
    // The integration suite drives one shared live gateway; keep files serial.
    fileParallelism: false
  }
})
