// The explorer's view model: one active session, a move palette that always
// mirrors the server's applicable-move list, and a history strip that
// replays to the shown graph. Every apply round-trips; there is no
// optimistic local state.

import {
  ApiClient,
  ApiError,
  MoveDescriptor,
  PatternIds,
  SessionSnapshot,
} from "./api.js";

export interface PaletteGroup {
  title: string;
  entries: MoveDescriptor[];
}

export interface HistoryEntry {
  label: string;
  canonicalKey: string;
}

const COEF_MOVES = new Set(["ext_beta", "beta_star", "r1a", "r1b", "r2"]);

export class ViewModel {
  state: SessionSnapshot | null = null;
  error: string | null = null;
  history: HistoryEntry[] = [];
  private initialKey: string | null = null;

  constructor(private api: ApiClient) {}

  get loaded(): boolean {
    return this.state !== null;
  }

  get badge(): string {
    return this.state ? this.state.graph.canonicalKey : "";
  }

  get canUndo(): boolean {
    return (this.state?.historyLength ?? 0) > 0;
  }

  get initialCanonicalKey(): string {
    return this.initialKey ?? "";
  }

  async load(input: string, mode: "term" | "glc" | "auto" = "auto"): Promise<boolean> {
    const kind = mode === "auto" ? sniff(input) : mode;
    this.error = null;
    try {
      if (this.state) await this.api.close(this.state.id).catch(() => undefined);
      this.state =
        kind === "glc"
          ? await this.api.createSession({ glc: input })
          : await this.api.createSession({ term: input });
      this.history = [];
      this.initialKey = this.state.graph.canonicalKey;
      return true;
    } catch (err) {
      this.state = null;
      this.error = describe(err);
      return false;
    }
  }

  paletteGroups(): PaletteGroup[] {
    if (!this.state) return [];
    const groups = new Map<string, MoveDescriptor[]>();
    for (const move of this.state.moves) {
      const params = move.params?.coef
        ? move.params.coef2
          ? `(${move.params.coef}, ${move.params.coef2})`
          : `(${move.params.coef})`
        : "";
      const title = `${move.move}${params} ${move.direction}`;
      if (!groups.has(title)) groups.set(title, []);
      groups.get(title)!.push(move);
    }
    return [...groups.entries()]
      .sort(([a], [b]) => a.localeCompare(b))
      .map(([title, entries]) => ({ title, entries }));
  }

  paletteCount(): number {
    return this.state?.moves.length ?? 0;
  }

  highlightFor(fingerprint: string): PatternIds {
    const move = this.state?.moves.find((m) => m.fingerprint === fingerprint);
    return move?.pattern ?? { nodes: [], edges: [], loops: [] };
  }

  acceptsCoefficient(move: MoveDescriptor): boolean {
    return move.direction === "reverse" && COEF_MOVES.has(move.move);
  }

  async applySelected(site: MoveDescriptor, coefOverride?: string): Promise<boolean> {
    if (!this.state) return false;
    this.error = null;
    let chosen = site;
    if (coefOverride && this.acceptsCoefficient(site)) {
      chosen = { ...site, params: { ...site.params, coef: coefOverride } };
    }
    try {
      const before = this.state.graph.canonicalKey;
      this.state = await this.api.apply(this.state.id, chosen);
      this.history.push({
        label: `${chosen.move} ${chosen.direction} @ ${chosen.label}`,
        canonicalKey: before,
      });
      return true;
    } catch (err) {
      this.error = describe(err);
      if (err instanceof ApiError && err.status === 409 && this.state) {
        // stale site: refresh the palette to the server's current list
        this.state.moves = await this.api.moves(this.state.id);
      }
      return false;
    }
  }

  async undo(): Promise<boolean> {
    if (!this.state || !this.canUndo) return false;
    this.error = null;
    try {
      this.state = await this.api.undo(this.state.id);
      this.history.pop();
      return true;
    } catch (err) {
      this.error = describe(err);
      return false;
    }
  }

  async dotText(): Promise<string> {
    if (!this.state) return "";
    return this.api.dot(this.state.id);
  }
}

function sniff(input: string): "term" | "glc" {
  const head = input.trimStart();
  const firstWord = head.split(/\s+/, 1)[0];
  return ["glc", "node", "edge", "in", "out", "wire", "loop"].includes(firstWord)
    ? "glc"
    : "term";
}

function describe(err: unknown): string {
  if (err instanceof ApiError) return `${err.code}: ${err.message}`;
  return err instanceof Error ? err.message : String(err);
}
