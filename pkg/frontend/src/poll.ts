import type { ApiClient } from "./api.js";
import type { Job } from "./types.js";

export interface PollOptions {
  intervalMs?: number;
  maxPolls?: number;
  onUpdate?: (job: Job) => void;
  setTimeoutFn?: (fn: () => void, ms: number) => unknown;
}

/**
 * Poll a job until it reaches a terminal state (done / failed).
 * At most one request is in flight at a time: the next poll is scheduled
 * only after the previous response arrives. Resolves with the terminal
 * job; rejects only on transport errors or when maxPolls is exhausted.
 */
export function pollJob(
  client: ApiClient,
  jobId: string,
  options: PollOptions = {},
): Promise<Job> {
  const intervalMs = options.intervalMs ?? 500;
  const maxPolls = options.maxPolls ?? 600;
  const schedule = options.setTimeoutFn ?? ((fn, ms) => setTimeout(fn, ms));
  return new Promise((resolve, reject) => {
    let polls = 0;
    const tick = () => {
      polls += 1;
      client
        .getJob(jobId)
        .then((job) => {
          options.onUpdate?.(job);
          if (job.state === "done" || job.state === "failed") {
            resolve(job);
          } else if (polls >= maxPolls) {
            reject(new Error(`job ${jobId} still ${job.state} after ${polls} polls`));
          } else {
            schedule(tick, intervalMs);
          }
        })
        .catch(reject);
    };
    tick();
  });
}
