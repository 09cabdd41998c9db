// Renders a graph snapshot to an SVG string. Layout is client-side and
// purely cosmetic (layers by longest feeder path); the gate symbols follow
// the calculus: λ triangle, ∧ inverted triangle, Υ diamond, a circle with
// its coefficient for dilations, and a square stop for terminations.

import { EdgeJson, EndpointJson, GraphJson, PatternIds } from "./api.js";

const NODE_W = 46;
const NODE_H = 34;
const GAP_X = 36;
const GAP_Y = 64;

interface Point {
  x: number;
  y: number;
}

function escapeXml(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function endpointName(end: EndpointJson): string {
  if (end.node !== undefined) return `n:${end.node}`;
  if (end.input !== undefined) return `in:${end.input}`;
  return `out:${end.output}`;
}

function layerAssignment(graph: GraphJson): Map<string, number> {
  // longest-path layering from the input side; cycles are cut wherever the
  // walk revisits a node on the current path
  const feeders = new Map<string, string[]>();
  for (const edge of graph.edges) {
    const tgt = edge.target.node;
    const src = edge.source.node;
    if (tgt !== undefined) {
      if (!feeders.has(tgt)) feeders.set(tgt, []);
      if (src !== undefined) feeders.get(tgt)!.push(src);
    }
  }
  const depth = new Map<string, number>();
  const onPath = new Set<string>();

  const visit = (id: string): number => {
    const known = depth.get(id);
    if (known !== undefined) return known;
    if (onPath.has(id)) return 0;
    onPath.add(id);
    let d = 0;
    for (const f of feeders.get(id) ?? []) d = Math.max(d, visit(f) + 1);
    onPath.delete(id);
    depth.set(id, d);
    return d;
  };
  for (const node of graph.nodes) visit(node.id);
  return depth;
}

function nodeGlyph(kind: string, coef: string | undefined, p: Point, cls: string): string {
  const { x, y } = p;
  const half = NODE_W / 2;
  const hh = NODE_H / 2;
  let shape: string;
  let label: string;
  switch (kind) {
    case "lambda":
      shape = `<polygon points="${x},${y - hh} ${x - half},${y + hh} ${x + half},${y + hh}" class="gate ${cls}"/>`;
      label = "λ";
      break;
    case "app":
      shape = `<polygon points="${x - half},${y - hh} ${x + half},${y - hh} ${x},${y + hh}" class="gate ${cls}"/>`;
      label = "∧";
      break;
    case "fanout":
      shape = `<polygon points="${x},${y - hh} ${x + half},${y} ${x},${y + hh} ${x - half},${y}" class="gate ${cls}"/>`;
      label = "Υ";
      break;
    case "dilation":
      shape = `<circle cx="${x}" cy="${y}" r="${hh + 3}" class="gate ${cls}"/>`;
      label = coef ?? "ε";
      break;
    default:
      shape = `<rect x="${x - hh}" y="${y - hh}" width="${NODE_H}" height="${NODE_H}" class="gate ${cls}"/>`;
      label = "⊥";
  }
  return (
    shape +
    `<text x="${x}" y="${y + 4}" text-anchor="middle" class="gate-label">${escapeXml(label)}</text>`
  );
}

export function renderSvg(graph: GraphJson, highlight?: PatternIds): string {
  const hi = highlight ?? { nodes: [], edges: [], loops: [] };
  const hiNodes = new Set(hi.nodes);
  const hiEdges = new Set(hi.edges);
  const hiLoops = new Set(hi.loops);

  const depth = layerAssignment(graph);
  const layers = new Map<number, string[]>();
  const maxDepth = Math.max(0, ...depth.values());
  for (const node of graph.nodes) {
    const d = (depth.get(node.id) ?? 0) + 1;
    if (!layers.has(d)) layers.set(d, []);
    layers.get(d)!.push(node.id);
  }

  const pos = new Map<string, Point>();
  const place = (ids: string[], layer: number) => {
    ids.sort();
    ids.forEach((id, i) => {
      pos.set(id, { x: 60 + i * (NODE_W + GAP_X), y: 50 + layer * GAP_Y });
    });
  };
  place(graph.inputs.map((l) => `in:${l}`), 0);
  for (const [d, ids] of [...layers.entries()].sort(([a], [b]) => a - b)) {
    place(ids.map((id) => `n:${id}`), d);
  }
  place(graph.outputs.map((l) => `out:${l}`), maxDepth + 2);
  graph.loops.forEach((lid, i) => {
    pos.set(`loop:${lid}`, { x: 40 + i * 50, y: 50 + (maxDepth + 3) * GAP_Y });
  });

  const width = Math.max(
    360,
    ...[...pos.values()].map((p) => p.x + NODE_W + 40),
  );
  const height = 80 + (maxDepth + 3) * GAP_Y + 40;

  const parts: string[] = [];
  for (const leaf of graph.inputs) {
    const p = pos.get(`in:${leaf}`)!;
    parts.push(
      `<text x="${p.x}" y="${p.y}" text-anchor="middle" class="leaf">${escapeXml(leaf)}</text>`,
    );
  }
  for (const leaf of graph.outputs) {
    const p = pos.get(`out:${leaf}`)!;
    parts.push(
      `<text x="${p.x}" y="${p.y}" text-anchor="middle" class="leaf">${escapeXml(leaf)}</text>`,
    );
  }
  for (const edge of graph.edges) {
    const a = pos.get(endpointName(edge.source))!;
    const b = pos.get(endpointName(edge.target))!;
    const cls = hiEdges.has(edge.id) ? "edge highlight" : "edge";
    const midY = (a.y + b.y) / 2;
    parts.push(
      `<path d="M ${a.x} ${a.y + 8} C ${a.x} ${midY}, ${b.x} ${midY}, ${b.x} ${b.y - 10}"` +
        ` class="${cls}" data-edge="${escapeXml(edge.id)}" marker-end="url(#arrow)"/>`,
    );
    if (edge.source.port) {
      parts.push(
        `<text x="${a.x + 6}" y="${a.y + 18}" class="port">${escapeXml(edge.source.port)}</text>`,
      );
    }
    if (edge.target.port) {
      parts.push(
        `<text x="${b.x + 6}" y="${b.y - 14}" class="port">${escapeXml(edge.target.port)}</text>`,
      );
    }
  }
  for (const node of graph.nodes) {
    const p = pos.get(`n:${node.id}`)!;
    const cls = hiNodes.has(node.id) ? "highlight" : "";
    parts.push(nodeGlyph(node.kind, node.coef, p, cls));
    parts.push(
      `<text x="${p.x}" y="${p.y + NODE_H}" text-anchor="middle" class="node-id">${escapeXml(node.id)}</text>`,
    );
  }
  for (const lid of graph.loops) {
    const p = pos.get(`loop:${lid}`)!;
    const cls = hiLoops.has(lid) ? "loop highlight" : "loop";
    parts.push(`<circle cx="${p.x}" cy="${p.y}" r="14" class="${cls}"/>`);
  }

  return (
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}"` +
    ` viewBox="0 0 ${width} ${height}">` +
    `<defs><marker id="arrow" viewBox="0 0 10 10" refX="9" refY="5" markerWidth="7"` +
    ` markerHeight="7" orient="auto-start-reverse">` +
    `<path d="M 0 0 L 10 5 L 0 10 z" class="arrowhead"/></marker></defs>` +
    parts.join("") +
    `</svg>`
  );
}
