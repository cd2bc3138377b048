/** Error toast with an optional retry affordance. */
export function showToast(
  doc: Document,
  container: HTMLElement,
  message: string,
  onRetry?: () => void,
): HTMLElement {
  const toast = doc.createElement("div");
  toast.className = "toast toast-error";

  const text = doc.createElement("span");
  text.textContent = message;
  toast.appendChild(text);

  if (onRetry) {
    const retry = doc.createElement("button");
    retry.type = "button";
    retry.className = "toast-retry";
    retry.textContent = "Retry";
    retry.addEventListener("click", () => {
      toast.remove();
      onRetry();
    });
    toast.appendChild(retry);
  }

  const dismiss = doc.createElement("button");
  dismiss.type = "button";
  dismiss.className = "toast-dismiss";
  dismiss.textContent = "×";
  dismiss.addEventListener("click", () => toast.remove());
  toast.appendChild(dismiss);

  container.appendChild(toast);
  return toast;
}
