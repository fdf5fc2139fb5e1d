import { ApiError, type ApiClient } from "./api.js";
import { el, swap } from "./dom.js";
import { JobMonitor } from "./jobs.js";
import { label, setUiLanguage, type UiLanguage } from "./labels.js";
import { PreviewPane } from "./preview.js";
import { renderRegistrationForm } from "./registration.js";
import type { RepositoryProfile } from "./types.js";

export interface AppOptions {
  /** Poll interval for the live job counter, in milliseconds. */
  jobPollMs?: number;
  /** Language of every built-in caption. */
  uiLanguage?: UiLanguage;
}

/**
 * Admin dashboard: account access, repository registration, harvest jobs,
 * vocabulary upload, and the recommendation preview, in one page.
 */
export class AdminApp {
  readonly monitor: JobMonitor;
  preview: PreviewPane | null = null;
  private current: RepositoryProfile | null = null;
  private readonly listBox: HTMLUListElement;
  private readonly detailBox: HTMLElement;
  private readonly jobBox: HTMLElement;
  private readonly accountStatus: HTMLElement;

  constructor(
    private readonly client: ApiClient,
    private readonly root: HTMLElement,
    options: AppOptions = {},
  ) {
    setUiLanguage(options.uiLanguage ?? "en");
    this.accountStatus = el("p", { "data-role": "account-status" });
    this.listBox = el("ul", { class: "repo-list", "data-role": "repo-list" });
    this.detailBox = el("section", { class: "repo-detail", "data-role": "repo-detail" });
    this.jobBox = el("div", { class: "job-panel", "data-role": "job-panel" });
    this.monitor = new JobMonitor(client, this.jobBox, options.jobPollMs ?? 2000);

    const registrationBox = el("div", { class: "registration" });
    renderRegistrationForm(registrationBox, client, {
      onRegistered: (profile) => {
        void this.refreshRepositories();
        this.openRepository(profile);
      },
    });

    this.root.append(
      el("h1", {}, ["term recommender"]),
      this.renderAccountSection(),
      el("section", { class: "repositories" }, [
        el("h2", {}, [label("register.title")]),
        registrationBox,
        this.listBox,
      ]),
      this.detailBox,
    );
  }

  /** Reload the repository list for the signed-in account. */
  async refreshRepositories(): Promise<void> {
    const profiles = await this.client.listRepositories();
    swap(
      this.listBox,
      profiles.map((profile) => this.renderRepositoryRow(profile)),
    );
  }

  /** Show one repository's profile, job controls, and preview. */
  openRepository(profile: RepositoryProfile): void {
    this.current = profile;
    this.monitor.stop();
    const previewBox = el("div", { class: "preview", "data-role": "preview" });
    swap(this.detailBox, [
      this.renderProfile(profile),
      this.renderJobControls(profile),
      this.jobBox,
      this.renderVocabularyUpload(profile),
      previewBox,
    ]);
    this.preview = new PreviewPane(this.client, previewBox, profile.repository_id, {
      initialMetric: profile.chosen_metric,
    });
  }

  get currentRepository(): RepositoryProfile | null {
    return this.current;
  }

  private renderAccountSection(): HTMLElement {
    const username = el("input", { name: "username", "data-role": "account-username" });
    const password = el("input", {
      name: "password",
      type: "password",
      "data-role": "account-password",
    });
    const email = el("input", { name: "email", type: "email", "data-role": "account-email" });
    const form = el("form", { class: "account-form" }, [
      el("label", {}, ["username ", username]),
      el("label", {}, ["password ", password]),
      el("label", {}, ["email ", email]),
      el("button", { type: "submit" }, [label("account.create")]),
    ]);
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      void this.createAccount(username.value, password.value, email.value);
    });

    const keyInput = el("input", { name: "api-key", "data-role": "api-key-input" });
    const keyForm = el("form", { class: "key-form" }, [
      el("label", {}, [label("account.use-key"), " ", keyInput]),
      el("button", { type: "submit" }, [label("account.apply-key")]),
    ]);
    keyForm.addEventListener("submit", (event) => {
      event.preventDefault();
      this.client.setApiKey(keyInput.value.trim());
      this.accountStatus.textContent = label("account.key-applied");
      void this.refreshRepositories();
    });

    return el("section", { class: "account" }, [
      el("h2", {}, [label("account.title")]),
      form,
      keyForm,
      this.accountStatus,
    ]);
  }

  private async createAccount(
    username: string,
    password: string,
    email: string,
  ): Promise<void> {
    try {
      const created = await this.client.createAccount(username, password, email);
      this.client.setApiKey(created.api_key);
      swap(this.accountStatus, [
        label("account.key-once"),
        " ",
        el("code", { "data-role": "api-key-once" }, [created.api_key]),
      ]);
      await this.refreshRepositories();
    } catch (err: unknown) {
      this.accountStatus.textContent =
        err instanceof ApiError ? err.detail : String(err);
    }
  }

  private renderRepositoryRow(profile: RepositoryProfile): HTMLElement {
    const open = el("button", { type: "button", "data-role": "open-repo" }, [
      label("repo.open"),
    ]);
    open.addEventListener("click", () => this.openRepository(profile));
    return el(
      "li",
      {
        "data-role": "repo-row",
        "data-repository-id": profile.repository_id,
      },
      [el("span", { class: "repo-url" }, [profile.oai_url]), " ", open],
    );
  }

  private renderProfile(profile: RepositoryProfile): HTMLElement {
    const vocabulary = profile.vocabulary
      ? `${profile.vocabulary.name} (${profile.vocabulary.terms})`
      : label("repo.no-vocabulary");
    return el("div", { class: "profile", "data-role": "profile" }, [
      el("h2", {}, [profile.oai_url]),
      el("p", {}, [
        `${label("repo.language")}: ${profile.language} · `,
        `${label("repo.metric")}: `,
        el("span", { "data-role": "profile-metric" }, [profile.chosen_metric]),
      ]),
      el("p", {}, [`${label("repo.vocabulary")}: ${vocabulary}`]),
      el("p", { "data-role": "profile-snapshot" }, [
        `${label("repo.snapshot")}: ${profile.snapshot ?? label("repo.no-snapshot")}`,
      ]),
    ]);
  }

  private renderJobControls(profile: RepositoryProfile): HTMLElement {
    const start = el("button", { type: "button", "data-role": "start-job" }, [
      label("jobs.start-full"),
    ]);
    const incremental = el(
      "button",
      { type: "button", "data-role": "start-incremental" },
      [label("jobs.start-incremental")],
    );
    const wire = (button: HTMLButtonElement, mode: "full" | "incremental") => {
      button.addEventListener("click", () => {
        button.disabled = true;
        this.client
          .startJob(profile.repository_id, mode)
          .then((job) => this.monitor.start(job))
          .catch((err: unknown) => {
            this.jobBox.textContent =
              err instanceof ApiError ? err.detail : String(err);
          })
          .finally(() => {
            button.disabled = false;
          });
      });
    };
    wire(start, "full");
    wire(incremental, "incremental");
    return el("div", { class: "job-controls" }, [start, " ", incremental]);
  }

  private renderVocabularyUpload(profile: RepositoryProfile): HTMLElement {
    const text = el("textarea", {
      rows: "4",
      "data-role": "vocab-text",
      placeholder: label("vocabulary.placeholder"),
    });
    const status = el("span", { "data-role": "vocab-status" });
    const upload = el("button", { type: "button", "data-role": "vocab-upload" }, [
      label("vocabulary.upload"),
    ]);
    upload.addEventListener("click", () => {
      this.client
        .uploadVocabulary(profile.repository_id, text.value)
        .then((result) => {
          status.textContent = `${result.terms} ${label("vocabulary.loaded")}`;
        })
        .catch((err: unknown) => {
          status.textContent = err instanceof ApiError ? err.detail : String(err);
        });
    });
    return el("div", { class: "vocabulary" }, [text, upload, " ", status]);
  }
}

/** Mount the dashboard onto a root element. */
export function boot(
  client: ApiClient,
  root: HTMLElement,
  options: AppOptions = {},
): AdminApp {
  return new AdminApp(client, root, options);
}
