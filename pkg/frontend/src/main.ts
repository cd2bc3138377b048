import { mountApp } from "./app.js";

// API base is configurable for deployments where the dashboard is not
// served by the verification service itself.
const apiBase =
  document.documentElement.dataset.apiBase ??
  (window as { CER_API_BASE?: string }).CER_API_BASE ??
  "";

mountApp(document, apiBase);
