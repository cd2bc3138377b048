import { ApiClient } from "./api.js";
import { renderCards } from "./cards.js";
import { pollJob } from "./poll.js";
import { showToast } from "./toast.js";
import type { InputMode, Job } from "./types.js";

export interface AppElements {
  form: HTMLFormElement;
  claimInput: HTMLTextAreaElement;
  urlInput: HTMLInputElement;
  videoInput: HTMLInputElement;
  modeTabs: HTMLElement;
  status: HTMLElement;
  results: HTMLElement;
  toasts: HTMLElement;
}

export interface AppOptions {
  pollIntervalMs?: number;
}

/**
 * Wires the three input modes to the service and renders verdict cards.
 * All verification happens server-side; this class only displays what the
 * API returns.
 */
export class DashboardApp {
  mode: InputMode = "claim";

  constructor(
    private doc: Document,
    private els: AppElements,
    private client: ApiClient,
    private options: AppOptions = {},
  ) {
    els.form.addEventListener("submit", (event) => {
      event.preventDefault();
      void this.submit();
    });
    els.modeTabs.querySelectorAll<HTMLButtonElement>("button[data-mode]").forEach(
      (button) => {
        button.addEventListener("click", () => {
          this.setMode(button.dataset.mode as InputMode);
        });
      },
    );
    this.setMode("claim");
  }

  setMode(mode: InputMode): void {
    this.mode = mode;
    this.els.modeTabs
      .querySelectorAll<HTMLButtonElement>("button[data-mode]")
      .forEach((button) => {
        button.classList.toggle("active", button.dataset.mode === mode);
      });
    this.doc.querySelectorAll<HTMLElement>("[data-panel]").forEach((panel) => {
      panel.hidden = panel.dataset.panel !== mode;
    });
  }

  private setStatus(text: string): void {
    this.els.status.textContent = text;
  }

  private showResults(jobStateText: string, cards: HTMLElement[]): void {
    this.setStatus(jobStateText);
    this.els.results.replaceChildren(...cards);
  }

  private fail(message: string, retry: () => void): void {
    this.setStatus("");
    showToast(this.doc, this.els.toasts, message, retry);
  }

  async submit(): Promise<void> {
    if (this.mode === "claim") {
      await this.submitClaim();
    } else if (this.mode === "url") {
      await this.submitUrl();
    } else {
      await this.submitVideo();
    }
  }

  private async submitClaim(): Promise<void> {
    const text = this.els.claimInput.value.trim();
    if (!text) return;
    this.setStatus("Verifying claim…");
    try {
      const response = await this.client.verifyClaim(text);
      const cached = response.cached ? " (cached)" : "";
      this.showResults(
        `Done${cached}`,
        renderCards(this.doc, [response.assessment]),
      );
    } catch (err) {
      this.fail(`Claim verification failed: ${(err as Error).message}`, () =>
        void this.submitClaim(),
      );
    }
  }

  private trackJob(accepted: Promise<{ job_id: string }>, retry: () => void): Promise<void> {
    this.setStatus("Submitting…");
    return accepted
      .then(({ job_id }) =>
        pollJob(this.client, job_id, {
          intervalMs: this.options.pollIntervalMs ?? 750,
          onUpdate: (job: Job) => this.setStatus(`Job ${job.state}…`),
        }),
      )
      .then((job) => {
        if (job.state === "failed") {
          this.showResults("", []);
          this.fail(`Job failed: ${job.error ?? "unknown error"}`, retry);
          return;
        }
        const label = job.results.length === 1 ? "claim" : "claims";
        this.showResults(
          `Done · ${job.results.length} ${label}`,
          renderCards(this.doc, job.results),
        );
      })
      .catch((err) => {
        this.fail(`Job tracking failed: ${(err as Error).message}`, retry);
      });
  }

  private submitUrl(): Promise<void> {
    const url = this.els.urlInput.value.trim();
    if (!url) return Promise.resolve();
    return this.trackJob(this.client.verifyUrl(url), () => void this.submitUrl());
  }

  private submitVideo(): Promise<void> {
    const file = this.els.videoInput.files?.[0];
    if (!file) return Promise.resolve();
    return this.trackJob(
      this.client.verifyVideo(file, file.name),
      () => void this.submitVideo(),
    );
  }
}

export function mountApp(doc: Document, apiBase = ""): DashboardApp {
  const els: AppElements = {
    form: doc.querySelector("#verify-form") as HTMLFormElement,
    claimInput: doc.querySelector("#claim-text") as HTMLTextAreaElement,
    urlInput: doc.querySelector("#url-input") as HTMLInputElement,
    videoInput: doc.querySelector("#video-input") as HTMLInputElement,
    modeTabs: doc.querySelector("#mode-tabs") as HTMLElement,
    status: doc.querySelector("#status") as HTMLElement,
    results: doc.querySelector("#results") as HTMLElement,
    toasts: doc.querySelector("#toasts") as HTMLElement,
  };
  return new DashboardApp(doc, els, new ApiClient(apiBase));
}
