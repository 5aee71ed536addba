// Thin client over the solve service.  What-if requests follow a
// cancel-and-replace policy: starting a new one aborts the request in
// flight, so the view never applies a stale response.

import type {
  ApiErrorBody, PlayersResponse, SolveOverrides, SolveResponse,
} from "./types";

export type FetchLike = (
  url: string,
  init?: RequestInit,
) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
  }
}

async function decode<T>(response: Response): Promise<T> {
  const body = await response.json();
  if (!response.ok) {
    const err = body as ApiErrorBody;
    throw new ApiError(response.status, err.error ?? "unknown", err.message ?? "");
  }
  return body as T;
}

export class Client {
  private whatifController: AbortController | null = null;

  constructor(
    private readonly base: string,
    private readonly fetchLike: FetchLike = (...args) => fetch(...args),
  ) {}

  async players(): Promise<PlayersResponse> {
    return decode(await this.fetchLike(`${this.base}/api/players`));
  }

  async solve(pitcherId: string, batterId: string): Promise<SolveResponse> {
    const response = await this.fetchLike(`${this.base}/api/solve`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ pitcher_id: pitcherId, batter_id: batterId }),
    });
    return decode(await Promise.resolve(response));
  }

  async solution(pitcherId: string, batterId: string): Promise<SolveResponse> {
    return decode(await this.fetchLike(
      `${this.base}/api/solution/${pitcherId}/${batterId}`));
  }

  /** Cancel-and-replace: a second call aborts the first. */
  async whatif(
    pitcherId: string,
    batterId: string,
    overrides: SolveOverrides,
  ): Promise<SolveResponse> {
    this.whatifController?.abort();
    const controller = new AbortController();
    this.whatifController = controller;
    const response = await this.fetchLike(`${this.base}/api/whatif`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({
        pitcher_id: pitcherId,
        batter_id: batterId,
        overrides,
      }),
      signal: controller.signal,
    });
    return decode(response);
  }
}
