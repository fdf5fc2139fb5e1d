import { ApiError, type ApiClient } from "./api.js";
import { renderCloudTerms } from "./cloud.js";
import { el, swap } from "./dom.js";
import { label } from "./labels.js";
import {
  RESERVED_METRIC,
  SELECTABLE_METRICS,
  type CloudResponse,
  type ExpandResponse,
  type RecommendResponse,
} from "./types.js";

interface CoherentAnswers {
  jaccard: RecommendResponse;
  nwd: RecommendResponse;
  cloud: CloudResponse;
  expansion: ExpandResponse;
  snapshotId: string;
}

export interface PreviewOptions {
  /** Metric used for the cloud and expansion panels; default jaccard. */
  initialMetric?: string;
  /** How often to retry when a publish lands mid-fetch; default 3. */
  coherenceRetries?: number;
}

/**
 * Side-by-side preview of what the service would answer: ranked lists for
 * both metrics, the weighted term cloud, and the expansion proposal, all
 * from one model snapshot.
 *
 * Every panel carries the snapshot id it was rendered from; if a publish
 * swaps the model between the four requests, the whole set is refetched, so
 * panels from two different snapshots never appear together. Responses of
 * an older query arriving late are discarded on a generation counter.
 */
export class PreviewPane {
  private generation = 0;
  private selectedMetric: string;
  private readonly retries: number;
  private readonly hint: HTMLElement;
  private readonly panels: HTMLElement;
  private readonly queryInput: HTMLInputElement;

  constructor(
    private readonly client: ApiClient,
    private readonly container: HTMLElement,
    private readonly repositoryId: string,
    options: PreviewOptions = {},
  ) {
    this.selectedMetric = options.initialMetric ?? "jaccard";
    this.retries = options.coherenceRetries ?? 3;
    this.queryInput = el("input", {
      type: "text",
      name: "query",
      "data-role": "preview-query",
      placeholder: label("preview.query"),
    });
    const runButton = el("button", { type: "submit" }, [label("preview.run")]);
    const form = el("form", { class: "preview-controls" }, [
      this.queryInput,
      runButton,
      this.renderMetricPicker(),
    ]);
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      void this.runQuery(this.queryInput.value);
    });
    this.hint = el("p", { class: "preview-hint", "data-role": "preview-hint" });
    this.panels = el("div", { class: "preview-panels", "data-role": "preview-panels" });
    this.container.append(
      el("h2", {}, [label("preview.title")]),
      form,
      this.hint,
      this.panels,
    );
  }

  /** Fetch all four answers for the term and render them as one snapshot. */
  async runQuery(term: string): Promise<void> {
    const generation = ++this.generation;
    const trimmed = term.trim();
    this.hint.textContent = "";
    if (!trimmed) {
      this.hint.textContent = label("preview.query");
      return;
    }
    try {
      const answers = await this.fetchCoherent(trimmed);
      if (generation !== this.generation) {
        return;
      }
      this.renderPanels(answers);
    } catch (err: unknown) {
      if (generation !== this.generation) {
        return;
      }
      if (err instanceof ApiError && err.status === 409) {
        this.hint.textContent = label("preview.no-model");
      } else if (err instanceof ApiError) {
        this.hint.textContent = err.detail;
      } else {
        this.hint.textContent = String(err);
      }
    }
  }

  /** Change the metric published as the repository default. */
  async selectMetric(metric: string): Promise<void> {
    const profile = await this.client.setMetric(this.repositoryId, metric);
    this.selectedMetric = profile.chosen_metric;
  }

  get metric(): string {
    return this.selectedMetric;
  }

  private async fetchCoherent(term: string): Promise<CoherentAnswers> {
    const id = this.repositoryId;
    for (let attempt = 0; ; attempt++) {
      const [jaccard, nwd, cloud, expansion] = await Promise.all([
        this.client.recommend(id, term, { metric: "jaccard" }),
        this.client.recommend(id, term, { metric: "nwd" }),
        this.client.cloud(id, term, { metric: this.selectedMetric }),
        this.client.expand(id, term, { metric: this.selectedMetric }),
      ]);
      const ids = new Set([
        jaccard.snapshot,
        nwd.snapshot,
        cloud.snapshot,
        expansion.snapshot,
      ]);
      if (ids.size === 1) {
        return { jaccard, nwd, cloud, expansion, snapshotId: jaccard.snapshot };
      }
      if (attempt >= this.retries) {
        throw new Error("the model changed while fetching; run the preview again");
      }
    }
  }

  private renderPanels(answers: CoherentAnswers): void {
    const { snapshotId } = answers;
    swap(this.panels, [
      this.renderMetricList(answers.jaccard, snapshotId),
      this.renderMetricList(answers.nwd, snapshotId),
      this.renderCloudPanel(answers.cloud, snapshotId),
      this.renderExpansionPanel(answers.expansion, snapshotId),
    ]);
  }

  private renderMetricList(
    response: RecommendResponse,
    snapshotId: string,
  ): HTMLElement {
    const rows = response.recommendations.map((rec) =>
      el("li", {}, [
        el("span", { class: "term-name" }, [rec.name]),
        " ",
        el("span", { class: "term-confidence" }, [rec.confidence.toFixed(3)]),
      ]),
    );
    return el(
      "section",
      {
        class: "metric-list",
        "data-role": "metric-list",
        "data-metric": response.metric,
        "data-snapshot-id": snapshotId,
      },
      [el("h3", {}, [response.metric]), el("ol", {}, rows)],
    );
  }

  private renderCloudPanel(cloud: CloudResponse, snapshotId: string): HTMLElement {
    return el(
      "section",
      {
        class: "cloud-panel",
        "data-role": "cloud-panel",
        "data-snapshot-id": snapshotId,
      },
      [el("h3", {}, ["cloud"]), renderCloudTerms(cloud.entries)],
    );
  }

  private renderExpansionPanel(
    expansion: ExpandResponse,
    snapshotId: string,
  ): HTMLElement {
    return el(
      "section",
      {
        class: "expansion-panel",
        "data-role": "expansion-panel",
        "data-snapshot-id": snapshotId,
      },
      [
        el("h3", {}, [label("preview.expansion")]),
        el("p", { "data-role": "expansion-line" }, [expansion.expanded.join(" ")]),
        el("p", { class: "expansion-added", "data-role": "expansion-added" }, [
          expansion.added.join(" "),
        ]),
      ],
    );
  }

  private renderMetricPicker(): HTMLElement {
    const holder = el("span", { class: "metric-picker" });
    for (const metric of [...SELECTABLE_METRICS, RESERVED_METRIC]) {
      const input = el("input", {
        type: "radio",
        name: "metric",
        value: metric,
        "data-role": `metric-${metric}`,
      });
      if (metric === this.selectedMetric) {
        input.checked = true;
      }
      if (metric === RESERVED_METRIC) {
        input.disabled = true;
        input.title = "external machine-learning module; not available";
      } else {
        input.addEventListener("change", () => {
          void this.selectMetric(metric).catch((err: unknown) => {
            this.hint.textContent =
              err instanceof ApiError ? err.detail : String(err);
          });
        });
      }
      holder.append(el("label", { class: `metric-choice-${metric}` }, [input, metric]));
    }
    return holder;
  }
}
