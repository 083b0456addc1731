/**
 * Trace tree model: a displayable tree built one-to-one from the service
 * trace record. The root collapses to the answer plus a one-line
 * explanation; expanding walks pronoun matches, their candidate evidence,
 * the chosen referent, and the assembled payload. Nothing is recomputed
 * client-side; every number comes from the trace.
 */

import type { ResolutionRecord, TurnResult } from "./types.js";

export interface TraceNode {
  label: string;
  detail?: string;
  children: TraceNode[];
}

function leaf(label: string, detail?: string): TraceNode {
  return { label, detail, children: [] };
}

function evidenceNodes(evidence: Record<string, unknown>): TraceNode[] {
  const nodes: TraceNode[] = [];
  for (const [key, value] of Object.entries(evidence)) {
    if (value === null || value === undefined) continue;
    if (Array.isArray(value) && value.every((v) => typeof v === "object" && v !== null)) {
      const parent: TraceNode = { label: key, children: [] };
      for (const item of value) {
        parent.children.push(leaf(JSON.stringify(item)));
      }
      nodes.push(parent);
    } else if (typeof value === "object") {
      nodes.push(leaf(key, JSON.stringify(value)));
    } else {
      nodes.push(leaf(key, String(value)));
    }
  }
  return nodes;
}

function resolutionNode(record: ResolutionRecord): TraceNode {
  const node: TraceNode = {
    label: `"${record.lexeme}" [${record.span[0]}, ${record.span[1]}) ${record.strategy}`,
    detail: record.status,
    children: [],
  };
  if (record.evidence) {
    const candidates: TraceNode = { label: "candidates / evidence", children: evidenceNodes(record.evidence) };
    node.children.push(candidates);
  }
  if (record.source !== undefined) {
    node.children.push(leaf("chosen referent", `${record.source}: "${record.phrase ?? ""}"`));
  }
  return node;
}

export function buildTraceTree(result: TurnResult): TraceNode {
  const trace = result.trace;
  const root: TraceNode = {
    label: result.answer,
    detail: result.explanation ?? (result.fallback ? "fallback reply" : undefined),
    children: [],
  };

  const pronouns: TraceNode = { label: `pronoun matches (${trace.pronouns.length})`, children: [] };
  for (const record of trace.resolutions ?? []) {
    pronouns.children.push(resolutionNode(record));
  }
  if ((trace.resolutions ?? []).length === 0) {
    for (const p of trace.pronouns) {
      pronouns.children.push(leaf(`"${p.lexeme}" [${p.span[0]}, ${p.span[1]}) ${p.strategy}`));
    }
  }
  root.children.push(pronouns);

  if (trace.replacements !== undefined) {
    const reps: TraceNode = { label: `replacements (${trace.replacements.length})`, children: [] };
    for (const r of trace.replacements) {
      reps.children.push(leaf(`[${r.span[0]}, ${r.span[1]}) -> "${r.phrase}"`));
    }
    root.children.push(reps);
  }

  if (trace.payload !== undefined) {
    root.children.push(leaf("assembled payload", trace.payload));
  }
  if (trace.ml_calls !== undefined) {
    root.children.push(leaf("ml calls", String(trace.ml_calls)));
  }
  for (const warning of trace.ml_warnings ?? []) {
    root.children.push(leaf("ml warning", warning));
  }
  if (trace.error) {
    root.children.push(leaf("error", trace.error));
  }
  return root;
}

/** Flatten the tree for list-style rendering or assertions. */
export function flattenTree(node: TraceNode, depth = 0): { depth: number; node: TraceNode }[] {
  const rows = [{ depth, node }];
  for (const child of node.children) {
    rows.push(...flattenTree(child, depth + 1));
  }
  return rows;
}
