import { el } from "./dom.js";
import type { CloudEntry } from "./types.js";

/**
 * One font size per weight bucket, strictly increasing. The service buckets
 * confidences into 1..5, so equal buckets render at the same size and a
 * larger size always means a weight at least as high.
 */
export const CLOUD_FONT_SIZES_PX = [12, 15, 19, 24, 30] as const;

export function fontSizeForBucket(bucket: number): number {
  const clamped = Math.min(
    CLOUD_FONT_SIZES_PX.length,
    Math.max(1, Math.round(bucket)),
  );
  return CLOUD_FONT_SIZES_PX[clamped - 1];
}

/**
 * Render cloud entries as inline spans scaled by bucket. Weight and bucket
 * ride along as data attributes so the ordering is checkable from the DOM.
 */
export function renderCloudTerms(entries: CloudEntry[]): HTMLElement {
  const holder = el("div", { class: "cloud-terms" });
  for (const entry of entries) {
    const span = el(
      "span",
      {
        class: "cloud-term",
        "data-weight": String(entry.weight),
        "data-bucket": String(entry.bucket),
        title: `${entry.term}: ${entry.weight.toFixed(3)}`,
      },
      [entry.term],
    );
    span.style.fontSize = `${fontSizeForBucket(entry.bucket)}px`;
    holder.append(span, " ");
  }
  return holder;
}
