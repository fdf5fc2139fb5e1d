/** Shared polling and naming helpers for the UI tests. */

interface UntilOptions {
  timeoutMs?: number;
  stepMs?: number;
  what?: string;
}

/**
 * Poll a probe until it returns a truthy value; the value is returned.
 * Throws with the probe's description once the timeout is exceeded.
 */
export async function until<T>(
  probe: () => T | Promise<T>,
  options: UntilOptions = {},
): Promise<NonNullable<T>> {
  const timeoutMs = options.timeoutMs ?? 15_000;
  const stepMs = options.stepMs ?? 25;
  const deadline = Date.now() + timeoutMs;
  let lastError: unknown = null;
  while (Date.now() < deadline) {
    try {
      const value = await probe();
      if (value) {
        return value as NonNullable<T>;
      }
    } catch (err) {
      lastError = err;
    }
    await sleep(stepMs);
  }
  const what = options.what ?? "condition";
  const suffix = lastError === null ? "" : ` (last error: ${String(lastError)})`;
  throw new Error(`timed out after ${timeoutMs}ms waiting for ${what}${suffix}`);
}

export function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

let counter = 0;

/** Unique username per call so test files never collide on one service. */
export function uniqueName(prefix: string): string {
  counter += 1;
  return `${prefix}-${process.pid}-${Date.now()}-${counter}`;
}
