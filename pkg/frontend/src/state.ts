import type {
  Candidate,
  DocumentView,
  EvaluationView,
  PurchaseItem,
  RefineView,
  SessionView,
} from "./types.js";

export type Step = "form" | "candidates" | "wizard" | "preview" | "evaluation";

export interface FieldRow {
  name: string;
  value: string;
}

export interface AppState {
  step: Step;
  fieldRows: FieldRow[];
  items: PurchaseItem[];
  candidates: Candidate[];
  session: SessionView | null;
  document: DocumentView | null;
  gold: DocumentView | null;
  refineResult: RefineView | null;
  evaluation: EvaluationView | null;
  forceGenerate: boolean;
  error: string | null;
}

export function initialState(): AppState {
  return {
    step: "form",
    fieldRows: [{ name: "project name", value: "" }],
    items: [],
    candidates: [],
    session: null,
    document: null,
    gold: null,
    refineResult: null,
    evaluation: null,
    forceGenerate: false,
    error: null,
  };
}

/** Submit is enabled only with at least one fully filled field row and no
 * half-filled rows (a value needs a field name). */
export function formValid(rows: FieldRow[]): boolean {
  const filled = rows.filter((r) => r.name.trim() !== "" && r.value.trim() !== "");
  const broken = rows.some((r) => r.name.trim() === "" && r.value.trim() !== "");
  return filled.length > 0 && !broken;
}

export function requirementFields(rows: FieldRow[]): Record<string, string> {
  const fields: Record<string, string> = {};
  for (const row of rows) {
    if (row.name.trim() !== "" && row.value.trim() !== "") {
      fields[row.name] = row.value;
    }
  }
  return fields;
}

export function cleanItems(items: PurchaseItem[]): PurchaseItem[] {
  return items.filter((i) => i.name.trim() !== "");
}

/** The wizard asks for exactly the server-reported missing keys, one per step. */
export function wizardStepCount(session: SessionView): number {
  return session.missing.length;
}

export function currentMissingKey(session: SessionView): string | null {
  return session.missing.length > 0 ? session.missing[0]! : null;
}

export function canGenerate(session: SessionView, force: boolean): boolean {
  return session.state === "ready" || (force && session.state === "collecting");
}

export function withCandidates(state: AppState, candidates: Candidate[]): AppState {
  return { ...state, step: "candidates", candidates, error: null };
}

export function withSession(state: AppState, session: SessionView): AppState {
  return { ...state, step: "wizard", session, error: null };
}

export function withDocument(
  state: AppState,
  document: DocumentView,
  session: SessionView,
): AppState {
  return { ...state, step: "preview", document, session, error: null };
}

export function withRefine(state: AppState, refineResult: RefineView): AppState {
  return { ...state, step: "preview", refineResult, document: refineResult.document, error: null };
}

export function withEvaluation(
  state: AppState,
  evaluation: EvaluationView,
  gold: DocumentView | null,
): AppState {
  return { ...state, step: "evaluation", evaluation, gold, error: null };
}

export function withError(state: AppState, error: string): AppState {
  return { ...state, error };
}
