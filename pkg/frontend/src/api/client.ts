// Typed wrapper over the gateway HTTP API. Only the documented endpoints are
// used; mutating and per-identity calls carry the signed-request headers.
import type { ClientSession } from "../session.js";

export interface ApiError {
  status: number;
  code: string;
  message: string;
}

export interface ArticleSummaryRow {
  article_id: string;
  group: string;
  state_flag: number;
  version: number;
  access: string;
  uploader: string;
}

export interface EndorsementRow {
  expert: string;
  verdict: string;
}

export interface CommentRow {
  comment_id: string;
  author: string;
  author_name: string;
  kind: string;
  body: string;
  digest: string;
}

export interface ModificationRow {
  modifier: string;
  time: number;
  article_id: string;
  new_digest: string;
  new_abstract_digest: string;
}

export interface ArticleDetail {
  article_id: string;
  group: string;
  uploader: string;
  state_flag: number;
  version: number;
  access: string;
  plaintext_digest: string;
  abstract_digest: string;
  abstract: string | null;
  text: string | null;
  thresholds: { expert_quorum: number; participation_ratio: string } | null;
  endorsements: EndorsementRow[];
  eligible_experts: number;
  modification_log: ModificationRow[];
  comments?: CommentRow[];
}

export interface UserInfo {
  address: string;
  name: string;
  role: string;
  groups: string[];
  balance: number;
  granted: boolean;
}

export interface HealthInfo {
  status: string;
  height: number;
  state_root: string;
}

export interface VerifyInfo {
  ok: boolean;
  height: number;
  broken_at: number | null;
  reason: string | null;
}

export interface RegisteredCredentials {
  address: string;
  public_key: string;
  private_key: string;
  name: string;
  role: string;
  groups: string[];
  balance: number;
}

export class GatewayClient {
  constructor(
    private baseUrl: string,
    private session: ClientSession,
    private fetchImpl: typeof fetch = fetch,
  ) {}

  private async request<T>(method: string, path: string, body?: unknown, signed = true): Promise<T> {
    const payload = body === undefined ? "" : JSON.stringify(body);
    const headers: Record<string, string> = { "Content-Type": "application/json" };
    if (signed) Object.assign(headers, this.session.signedHeaders(method, path, payload));
    const response = await this.fetchImpl(this.baseUrl + path, {
      method,
      headers,
      body: body === undefined ? undefined : payload,
    });
    const text = await response.text();
    const parsed = text ? JSON.parse(text) : {};
    if (!response.ok) {
      const failure: ApiError = {
        status: response.status,
        code: parsed.code ?? "error",
        message: parsed.message ?? response.statusText,
      };
      throw failure;
    }
    return parsed as T;
  }

  register(name: string, role: string, groups: string[]): Promise<RegisteredCredentials> {
    return this.request<RegisteredCredentials>("POST", "/api/v1/users", { name, role, groups }, false);
  }

  userInfo(address: string): Promise<UserInfo> {
    return this.request<UserInfo>("GET", `/api/v1/users/${address}`, undefined, false);
  }

  listArticles(): Promise<{ articles: ArticleSummaryRow[] }> {
    return this.request("GET", "/api/v1/articles");
  }

  article(articleId: string): Promise<ArticleDetail> {
    return this.request("GET", `/api/v1/articles/${articleId}`);
  }

  submitArticle(text: string, group: string, articleId?: string): Promise<ArticleDetail> {
    const body: Record<string, string> = { text, group };
    if (articleId) body.article_id = articleId;
    return this.request("POST", "/api/v1/articles", body);
  }

  startReview(articleId: string, quorum: number, ratio: string): Promise<ArticleDetail> {
    return this.request("POST", `/api/v1/articles/${articleId}/review`, {
      expert_quorum: quorum,
      participation_ratio: ratio,
    });
  }

  endorse(articleId: string, verdict: "favorable" | "unfavorable"): Promise<ArticleDetail> {
    return this.request("POST", `/api/v1/articles/${articleId}/endorsements`, { verdict });
  }

  comment(articleId: string, kind: "comment" | "annotation", body: string): Promise<{ comment_id: string; digest: string }> {
    return this.request("POST", `/api/v1/articles/${articleId}/comments`, { kind, body });
  }

  modify(articleId: string, text: string): Promise<ArticleDetail> {
    return this.request("POST", `/api/v1/articles/${articleId}/versions`, { text });
  }

  health(): Promise<HealthInfo> {
    return this.request("GET", "/api/v1/healthz", undefined, false);
  }

  chainVerify(): Promise<VerifyInfo> {
    return this.request("GET", "/api/v1/chain/verify", undefined, false);
  }

  chainHeight(): Promise<{ height: number }> {
    return this.request("GET", "/api/v1/chain/height", undefined, false);
  }
}
