/** Thin typed client for the decision-service JSON API. */

import {
  CriteriaPayload,
  CriteriaResponse,
  FilterClausePayload,
  FilterResponse,
  Meta,
  Overview,
  SessionInfo,
  SolutionDetail,
} from "./types.js";

export class ApiError extends Error {
  constructor(public status: number, detail: string) {
    super(detail);
  }
}

export class ApiClient {
  constructor(private baseUrl: string = "", private fetcher: typeof fetch = fetch) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.fetcher(`${this.baseUrl}${path}`, {
      method,
      headers: body !== undefined ? { "Content-Type": "application/json" } : undefined,
      body: body !== undefined ? JSON.stringify(body) : undefined,
    });
    if (!response.ok) {
      let detail = response.statusText;
      try {
        const payload = await response.json();
        detail = payload.detail ?? detail;
      } catch {
        /* non-JSON error body */
      }
      throw new ApiError(response.status, detail);
    }
    return response.json() as Promise<T>;
  }

  meta(): Promise<Meta> {
    return this.request("GET", "/api/meta");
  }

  createSession(): Promise<SessionInfo> {
    return this.request("POST", "/api/sessions");
  }

  overview(
    sid: string,
    periods: number[] | "all" | null,
    includeSolutions = false
  ): Promise<Overview> {
    const params = new URLSearchParams();
    if (periods === "all") params.set("periods", "all");
    else if (periods) params.set("periods", periods.join(","));
    if (includeSolutions) params.set("include_solutions", "true");
    const qs = params.toString();
    return this.request("GET", `/api/sessions/${sid}/overview${qs ? "?" + qs : ""}`);
  }

  setCriteria(sid: string, payload: CriteriaPayload): Promise<CriteriaResponse> {
    return this.request("PUT", `/api/sessions/${sid}/criteria`, payload);
  }

  applyFilter(sid: string, clauses: FilterClausePayload[]): Promise<FilterResponse> {
    return this.request("POST", `/api/sessions/${sid}/filter`, { clauses });
  }

  solutionDetail(sid: string, solutionId: number): Promise<SolutionDetail> {
    return this.request("GET", `/api/sessions/${sid}/solutions/${solutionId}`);
  }

  shortlist(sid: string, ids: number[]): Promise<{ session: string; ids: number[] }> {
    return this.request("POST", `/api/sessions/${sid}/shortlist`, { ids });
  }

  finalize(sid: string, id: number): Promise<Record<string, unknown>> {
    return this.request("POST", `/api/sessions/${sid}/finalize`, { id });
  }
}
