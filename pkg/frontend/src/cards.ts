import type { Assessment, VerdictLabel } from "./types.js";

// Label badge color classes: true=green, false=red, nei=amber (styles.css).
const LABEL_CLASS: Record<VerdictLabel, string> = {
  true: "badge-true",
  false: "badge-false",
  nei: "badge-nei",
};

const LABEL_TEXT: Record<VerdictLabel, string> = {
  true: "True",
  false: "False",
  nei: "Not enough info",
};

const PUBMED_BASE = "https://pubmed.ncbi.nlm.nih.gov";

export function confidencePhrase(label: VerdictLabel, confidence: number): string {
  const qualifier = confidence >= 0.75 ? "Most likely" : "Possibly";
  return `${qualifier} ${LABEL_TEXT[label]}`;
}

function formatPercent(confidence: number): string {
  return `${(confidence * 100).toFixed(2)}%`;
}

function formatSeconds(s: number): string {
  const m = Math.floor(s / 60);
  const rest = s - m * 60;
  return `${m}:${rest.toFixed(1).padStart(4, "0")}`;
}

function provenanceLine(doc: Document, a: Assessment): HTMLElement | null {
  const parts: string[] = [];
  if (a.claim.timestamp) {
    const [start, end] = a.claim.timestamp;
    parts.push(`⏱ ${formatSeconds(start)}–${formatSeconds(end)}`);
  }
  if (a.claim.span) {
    parts.push(`chars ${a.claim.span[0]}–${a.claim.span[1]}`);
  }
  if (a.claim.origin_ref) {
    parts.push(a.claim.origin_ref);
  }
  if (parts.length === 0) return null;
  const el = doc.createElement("div");
  el.className = "card-provenance";
  el.textContent = parts.join(" · ");
  return el;
}

function evidenceList(doc: Document, a: Assessment): HTMLElement {
  const wrap = doc.createElement("div");
  wrap.className = "card-evidence";
  const heading = doc.createElement("h4");
  heading.textContent = `Evidence (${a.evidence.length})`;
  wrap.appendChild(heading);
  const list = doc.createElement("ol");
  for (const passage of a.evidence) {
    const item = doc.createElement("li");
    item.className = "evidence-entry";

    const link = doc.createElement("a");
    link.href = `${PUBMED_BASE}/${encodeURIComponent(passage.doc_id)}/`;
    link.target = "_blank";
    link.rel = "noopener noreferrer";
    link.textContent = passage.title || passage.doc_id;
    item.appendChild(link);

    const meta = doc.createElement("span");
    meta.className = "evidence-meta";
    meta.textContent = ` ${passage.retriever} · score ${passage.score.toFixed(3)}`;
    item.appendChild(meta);

    const body = doc.createElement("p");
    body.className = "evidence-text";
    body.textContent = passage.text;
    item.appendChild(body);

    list.appendChild(item);
  }
  wrap.appendChild(list);
  return wrap;
}

/**
 * One verdict card. Justification and evidence start collapsed; the
 * expand toggle only flips visibility, it never touches the data.
 */
export function renderAssessmentCard(doc: Document, a: Assessment): HTMLElement {
  const card = doc.createElement("article");
  card.className = "claim-card";
  card.dataset.label = a.label;

  const header = doc.createElement("header");
  header.className = "card-header";

  const badge = doc.createElement("span");
  badge.className = `badge ${LABEL_CLASS[a.label]}`;
  badge.textContent = LABEL_TEXT[a.label];
  header.appendChild(badge);

  const verdict = doc.createElement("span");
  verdict.className = "card-verdict";
  verdict.textContent = `${confidencePhrase(a.label, a.confidence)} · ${formatPercent(a.confidence)} confidence`;
  header.appendChild(verdict);

  if (a.degraded) {
    const degraded = doc.createElement("span");
    degraded.className = "badge badge-degraded";
    degraded.textContent = "degraded";
    header.appendChild(degraded);
  }
  card.appendChild(header);

  const claimText = doc.createElement("p");
  claimText.className = "card-claim";
  claimText.textContent = a.claim.text;
  card.appendChild(claimText);

  const provenance = provenanceLine(doc, a);
  if (provenance) card.appendChild(provenance);

  const details = doc.createElement("div");
  details.className = "card-details";
  details.hidden = true;

  const justification = doc.createElement("div");
  justification.className = "card-justification";
  const jHeading = doc.createElement("h4");
  jHeading.textContent = "Justification";
  justification.appendChild(jHeading);
  const jBody = doc.createElement("p");
  jBody.textContent = a.justification.text || "(no justification available)";
  justification.appendChild(jBody);
  details.appendChild(justification);
  details.appendChild(evidenceList(doc, a));
  card.appendChild(details);

  const toggle = doc.createElement("button");
  toggle.type = "button";
  toggle.className = "card-toggle";
  toggle.textContent = "Show justification & evidence";
  toggle.addEventListener("click", () => {
    details.hidden = !details.hidden;
    toggle.textContent = details.hidden
      ? "Show justification & evidence"
      : "Hide justification & evidence";
  });
  card.appendChild(toggle);

  return card;
}

export function renderCards(doc: Document, assessments: Assessment[]): HTMLElement[] {
  return assessments.map((a) => renderAssessmentCard(doc, a));
}
