import type { ClaimResponse, Job, JobAccepted } from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    message: string,
    public status: number,
  ) {
    super(message);
  }
}

/** Thin client for the /v1 API; base URL and fetch are injectable. */
export class ApiClient {
  constructor(
    private baseUrl: string = "",
    private fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async parse<T>(resp: Response): Promise<T> {
    if (!resp.ok) {
      let detail = `HTTP ${resp.status}`;
      try {
        const body = await resp.json();
        if (body && typeof body.detail === "string") detail = body.detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(detail, resp.status);
    }
    return (await resp.json()) as T;
  }

  verifyClaim(text: string): Promise<ClaimResponse> {
    return this.fetchFn(`${this.baseUrl}/v1/verify/claim`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ text }),
    }).then((r) => this.parse<ClaimResponse>(r));
  }

  verifyUrl(url: string): Promise<JobAccepted> {
    return this.fetchFn(`${this.baseUrl}/v1/verify/url`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ url }),
    }).then((r) => this.parse<JobAccepted>(r));
  }

  verifyVideo(file: File | Blob, filename = "upload.mp4"): Promise<JobAccepted> {
    const form = new FormData();
    form.append("file", file, filename);
    return this.fetchFn(`${this.baseUrl}/v1/verify/video`, {
      method: "POST",
      body: form,
    }).then((r) => this.parse<JobAccepted>(r));
  }

  getJob(jobId: string): Promise<Job> {
    return this.fetchFn(`${this.baseUrl}/v1/jobs/${jobId}`).then((r) =>
      this.parse<Job>(r),
    );
  }
}
