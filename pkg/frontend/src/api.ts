import type {
  AccountCreated,
  CloudResponse,
  ExpandResponse,
  JobView,
  RecommendResponse,
  RegistrationForm,
  RepositoryProfile,
} from "./types.js";

/** A non-2xx answer from the service, with its detail text preserved. */
export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly detail: string,
  ) {
    super(detail);
    this.name = "ApiError";
  }
}

type Query = Record<string, string | number | undefined>;

interface RequestOptions {
  query?: Query;
  json?: unknown;
  text?: string;
}

export interface ApiClientOptions {
  /** Injection point for tests; defaults to the global fetch. */
  fetchImpl?: typeof fetch;
}

/**
 * Thin typed client for the documented /api/v1 endpoints. Auth is an API
 * key sent as X-Api-Key; in a browser a session cookie from login() works
 * as well, with no header needed.
 */
export class ApiClient {
  private apiKey: string | null = null;
  private readonly fetchImpl: typeof fetch;

  constructor(
    public readonly baseUrl: string,
    options: ApiClientOptions = {},
  ) {
    this.fetchImpl = options.fetchImpl ?? fetch.bind(globalThis);
  }

  setApiKey(key: string | null): void {
    this.apiKey = key;
  }

  private async request<T>(
    method: string,
    path: string,
    options: RequestOptions = {},
  ): Promise<T> {
    const url = new URL(this.baseUrl.replace(/\/$/, "") + path);
    for (const [name, value] of Object.entries(options.query ?? {})) {
      if (value !== undefined) {
        url.searchParams.set(name, String(value));
      }
    }
    const headers: Record<string, string> = { Accept: "application/json" };
    if (this.apiKey) {
      headers["X-Api-Key"] = this.apiKey;
    }
    let body: string | undefined;
    if (options.json !== undefined) {
      headers["Content-Type"] = "application/json";
      body = JSON.stringify(options.json);
    } else if (options.text !== undefined) {
      headers["Content-Type"] = "text/plain";
      body = options.text;
    }
    const response = await this.fetchImpl(url.toString(), { method, headers, body });
    const raw = await response.text();
    if (!response.ok) {
      throw new ApiError(response.status, extractDetail(raw));
    }
    return (raw ? JSON.parse(raw) : null) as T;
  }

  createAccount(
    username: string,
    password: string,
    email: string,
  ): Promise<AccountCreated> {
    return this.request("POST", "/api/v1/accounts", {
      json: { username, password, email },
    });
  }

  login(username: string, password: string): Promise<{ account_id: string }> {
    return this.request("POST", "/api/v1/session", {
      json: { username, password },
    });
  }

  logout(): Promise<void> {
    return this.request("DELETE", "/api/v1/session");
  }

  listRepositories(): Promise<RepositoryProfile[]> {
    return this.request("GET", "/api/v1/repositories");
  }

  registerRepository(form: RegistrationForm): Promise<RepositoryProfile> {
    return this.request("POST", "/api/v1/repositories", { json: form });
  }

  getRepository(repositoryId: string): Promise<RepositoryProfile> {
    return this.request("GET", `/api/v1/repositories/${repositoryId}`);
  }

  setMetric(repositoryId: string, metric: string): Promise<RepositoryProfile> {
    return this.request("PATCH", `/api/v1/repositories/${repositoryId}`, {
      json: { chosen_metric: metric },
    });
  }

  uploadVocabulary(
    repositoryId: string,
    text: string,
  ): Promise<{ terms: number }> {
    return this.request("POST", `/api/v1/repositories/${repositoryId}/vocabulary`, {
      text,
    });
  }

  startJob(repositoryId: string, mode: string = "full"): Promise<JobView> {
    return this.request("POST", `/api/v1/repositories/${repositoryId}/jobs`, {
      query: { mode },
    });
  }

  getJob(jobId: string): Promise<JobView> {
    return this.request("GET", `/api/v1/jobs/${jobId}`);
  }

  recommend(
    repositoryId: string,
    term: string,
    options: { limit?: number; metric?: string } = {},
  ): Promise<RecommendResponse> {
    return this.request("GET", `/api/v1/repositories/${repositoryId}/recommend`, {
      query: { term, limit: options.limit, metric: options.metric },
    });
  }

  expand(
    repositoryId: string,
    term: string,
    options: { n?: number; metric?: string } = {},
  ): Promise<ExpandResponse> {
    return this.request("GET", `/api/v1/repositories/${repositoryId}/expand`, {
      query: { term, n: options.n, metric: options.metric },
    });
  }

  cloud(
    repositoryId: string,
    term: string,
    options: { k?: number; metric?: string } = {},
  ): Promise<CloudResponse> {
    return this.request("GET", `/api/v1/repositories/${repositoryId}/cloud`, {
      query: { term, k: options.k, metric: options.metric },
    });
  }
}

/** Errors arrive as {"detail": ...}; keep raw text when they do not. */
function extractDetail(raw: string): string {
  try {
    const parsed = JSON.parse(raw);
    if (parsed && typeof parsed.detail === "string") {
      return parsed.detail;
    }
    if (parsed && parsed.detail !== undefined) {
      return JSON.stringify(parsed.detail);
    }
  } catch {
    // fall through to the raw body
  }
  return raw || "request failed";
}
