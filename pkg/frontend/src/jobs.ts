import type { ApiClient } from "./api.js";
import { el, swap } from "./dom.js";
import { label } from "./labels.js";
import { TERMINAL_JOB_STATES, type JobView } from "./types.js";

/**
 * Live job status panel. Polls the job endpoint at a fixed interval until
 * the job reaches a terminal state; a failed poll shows a stale-data banner
 * above the last known state instead of blanking the panel.
 */
export class JobMonitor {
  private timer: ReturnType<typeof setInterval> | null = null;
  private lastJob: JobView | null = null;
  private stale = false;

  constructor(
    private readonly client: ApiClient,
    private readonly container: HTMLElement,
    private readonly intervalMs: number = 2000,
  ) {
    this.container.classList.add("job-monitor");
  }

  /** Begin watching a job; replaces whatever was watched before. */
  start(job: JobView): void {
    this.stop();
    this.lastJob = job;
    this.stale = false;
    this.render();
    if (this.isTerminal(job)) {
      return;
    }
    this.timer = setInterval(() => {
      void this.tick(job.job_id);
    }, this.intervalMs);
  }

  stop(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }

  get current(): JobView | null {
    return this.lastJob;
  }

  private isTerminal(job: JobView): boolean {
    return TERMINAL_JOB_STATES.includes(job.state);
  }

  private async tick(jobId: string): Promise<void> {
    try {
      const job = await this.client.getJob(jobId);
      this.lastJob = job;
      this.stale = false;
      if (this.isTerminal(job)) {
        this.stop();
      }
    } catch {
      this.stale = true;
    }
    this.render();
  }

  private render(): void {
    const job = this.lastJob;
    if (job === null) {
      swap(this.container, []);
      return;
    }
    const children: (HTMLElement | string)[] = [];
    if (this.stale) {
      children.push(
        el("p", { class: "stale-banner", "data-role": "stale-banner" }, [
          label("jobs.stale"),
        ]),
      );
    }
    children.push(
      el("p", { class: "job-state", "data-role": "job-state" }, [job.state]),
      el("p", { class: "job-records" }, [
        el("span", { "data-role": "records-seen" }, [String(job.records_seen)]),
        ` ${label("jobs.records")}`,
      ]),
    );
    if (job.stage) {
      children.push(
        el("p", { class: "job-stage", "data-role": "job-stage" }, [job.stage]),
      );
    }
    if (job.error) {
      children.push(
        el("p", { class: "job-error", "data-role": "job-error" }, [job.error]),
      );
    }
    if (job.state === "done") {
      children.push(
        el("p", { class: "job-done", "data-role": "job-done" }, [
          label("jobs.published"),
        ]),
      );
    }
    swap(this.container, children);
  }
}
