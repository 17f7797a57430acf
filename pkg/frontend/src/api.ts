import type {
  Candidate,
  DocumentView,
  EvaluationView,
  Health,
  PurchaseItem,
  RefineView,
  SessionView,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const response = await fetch(url, {
    headers: { "Content-Type": "application/json" },
    ...init,
  });
  const body = await response.json().catch(() => ({}));
  if (!response.ok) {
    const code = typeof body.code === "string" ? body.code : `HTTP${response.status}`;
    const message = typeof body.message === "string" ? body.message : response.statusText;
    throw new ApiError(response.status, code, message);
  }
  return body as T;
}

/** Thin typed client over the service endpoints; no score math happens here. */
export class ApiClient {
  constructor(private baseUrl: string) {}

  private url(path: string): string {
    return `${this.baseUrl}${path}`;
  }

  healthz(): Promise<Health> {
    return request(this.url("/healthz"));
  }

  buildIndex(): Promise<{ fingerprint: string; documents: number }> {
    return request(this.url("/index/build"), { method: "POST" });
  }

  retrieve(
    fields: Record<string, string>,
    cList: PurchaseItem[],
    k?: number,
  ): Promise<{ candidates: Candidate[] }> {
    return request(this.url("/retrieve"), {
      method: "POST",
      body: JSON.stringify({ fields, c_list: cList, k }),
    });
  }

  createSession(templateId: string, fields: Record<string, string>): Promise<SessionView> {
    return request(this.url("/sessions"), {
      method: "POST",
      body: JSON.stringify({ template_id: templateId, fields }),
    });
  }

  getSession(sessionId: string): Promise<SessionView> {
    return request(this.url(`/sessions/${sessionId}`));
  }

  answer(sessionId: string, key: string, value: string): Promise<SessionView> {
    return request(this.url(`/sessions/${sessionId}/answers`), {
      method: "POST",
      body: JSON.stringify({ key, value }),
    });
  }

  generate(
    sessionId: string,
    force = false,
  ): Promise<{ document: DocumentView; session: SessionView }> {
    return request(this.url(`/sessions/${sessionId}/generate`), {
      method: "POST",
      body: JSON.stringify({ force }),
    });
  }

  refine(
    docId: string,
    fields: Record<string, string>,
    cList: PurchaseItem[],
  ): Promise<RefineView> {
    return request(this.url(`/documents/${docId}/refine`), {
      method: "POST",
      body: JSON.stringify({ fields, c_list: cList }),
    });
  }

  evaluate(body: {
    gen_id?: string;
    gen_doc?: unknown;
    gold_id?: string;
    gold_doc?: unknown;
  }): Promise<EvaluationView> {
    return request(this.url("/evaluate"), { method: "POST", body: JSON.stringify(body) });
  }

  getDocument(docId: string): Promise<{ document: DocumentView }> {
    return request(this.url(`/corpus/documents/${docId}`));
  }
}
