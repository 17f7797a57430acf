import { ApiClient, ApiError } from "./api.js";
import { renderApp } from "./render.js";
import {
  AppState,
  cleanItems,
  initialState,
  requirementFields,
  withCandidates,
  withDocument,
  withError,
  withEvaluation,
  withRefine,
  withSession,
} from "./state.js";

const BASE_URL = (window as { TENDERFORGE_API?: string }).TENDERFORGE_API ?? "";
const client = new ApiClient(BASE_URL);

let state: AppState = initialState();
const root = document.getElementById("app")!;

function render(): void {
  root.innerHTML = renderApp(state);
}

function setState(next: AppState): void {
  state = next;
  render();
}

function readFormInputs(): void {
  state.fieldRows = state.fieldRows.map((row, i) => ({
    name: (root.querySelector(`.field-name[data-row="${i}"]`) as HTMLInputElement)?.value ?? row.name,
    value:
      (root.querySelector(`.field-value[data-row="${i}"]`) as HTMLInputElement)?.value ?? row.value,
  }));
  state.items = state.items.map((item, i) => {
    const name = (root.querySelector(`.item-name[data-item="${i}"]`) as HTMLInputElement)?.value;
    const quantity = (root.querySelector(`.item-quantity[data-item="${i}"]`) as HTMLInputElement)
      ?.value;
    const unit = (root.querySelector(`.item-unit[data-item="${i}"]`) as HTMLInputElement)?.value;
    return {
      name: name ?? item.name,
      quantity: quantity ? Number(quantity) : null,
      unit: unit || null,
    };
  });
}

async function guard(action: () => Promise<void>): Promise<void> {
  try {
    await action();
  } catch (error) {
    const message =
      error instanceof ApiError ? `${error.code}: ${error.message}` : String(error);
    setState(withError(state, message));
  }
}

root.addEventListener("click", (event) => {
  const target = event.target as HTMLElement;

  if (target.id === "add-field") {
    readFormInputs();
    state.fieldRows.push({ name: "", value: "" });
    render();
  } else if (target.id === "add-item") {
    readFormInputs();
    state.items.push({ name: "" });
    render();
  } else if (target.classList.contains("remove-field")) {
    readFormInputs();
    state.fieldRows.splice(Number(target.dataset.row), 1);
    render();
  } else if (target.classList.contains("remove-item")) {
    readFormInputs();
    state.items.splice(Number(target.dataset.item), 1);
    render();
  } else if (target.id === "submit-requirement") {
    readFormInputs();
    void guard(async () => {
      const { candidates } = await client.retrieve(
        requirementFields(state.fieldRows),
        cleanItems(state.items),
      );
      setState(withCandidates(state, candidates));
    });
  } else if (target.classList.contains("pick-template")) {
    const docId = target.dataset.doc!;
    void guard(async () => {
      const session = await client.createSession(docId, requirementFields(state.fieldRows));
      setState(withSession(state, session));
    });
  } else if (target.id === "submit-answer") {
    const key = target.dataset.key!;
    const value = (root.querySelector("#answer-value") as HTMLInputElement).value;
    void guard(async () => {
      const session = await client.answer(state.session!.session_id, key, value);
      setState(withSession(state, session));
    });
  } else if (target.id === "force-generate") {
    state.forceGenerate = (target as HTMLInputElement).checked;
    render();
  } else if (target.id === "generate") {
    void guard(async () => {
      const { document: doc, session } = await client.generate(
        state.session!.session_id,
        state.forceGenerate,
      );
      setState(withDocument(state, doc, session));
    });
  } else if (target.id === "refine") {
    void guard(async () => {
      const refined = await client.refine(
        state.document!.id,
        requirementFields(state.fieldRows),
        cleanItems(state.items),
      );
      setState(withRefine(state, refined));
    });
  } else if (target.id === "evaluate") {
    const goldId = (root.querySelector("#gold-id") as HTMLInputElement).value.trim();
    void guard(async () => {
      const gold = goldId ? (await client.getDocument(goldId)).document : null;
      const report = await client.evaluate({
        gen_id: state.document!.id,
        ...(goldId ? { gold_id: goldId } : { gold_id: state.document!.id }),
      });
      setState(withEvaluation(state, report, gold));
    });
  }
});

render();
