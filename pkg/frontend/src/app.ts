// Application controller: owns the state, talks to the gateway, and renders
// whichever surface is active. Chain-backed values are rendered only from
// confirmed API responses, never optimistically.
import {
  GatewayClient,
  type ApiError,
  type ArticleDetail,
  type ArticleSummaryRow,
  type HealthInfo,
  type UserInfo,
  type VerifyInfo,
} from "./api/client.js";
import { ClientSession, type Identity, type KeyStore } from "./session.js";
import {
  articleDetailView,
  articleListView,
  errorBanner,
  loginView,
  systemInfoView,
  uploadView,
  userCenterView,
} from "./views.js";

export type Surface = "login" | "articles" | "upload" | "article" | "user" | "system";

export interface AppState {
  surface: Surface;
  articles: ArticleSummaryRow[];
  detail: ArticleDetail | null;
  user: UserInfo | null;
  health: HealthInfo | null;
  verify: VerifyInfo | null;
  error: ApiError | null;
}

export class App {
  readonly session: ClientSession;
  readonly client: GatewayClient;
  state: AppState = {
    surface: "login",
    articles: [],
    detail: null,
    user: null,
    health: null,
    verify: null,
    error: null,
  };

  constructor(baseUrl: string, store: KeyStore, fetchImpl: typeof fetch = fetch) {
    this.session = new ClientSession(store);
    this.client = new GatewayClient(baseUrl, this.session, fetchImpl);
    if (this.session.current) this.state.surface = "articles";
  }

  private async guard<T>(work: () => Promise<T>): Promise<T | null> {
    try {
      this.state.error = null;
      return await work();
    } catch (failure) {
      this.state.error = failure as ApiError;
      return null;
    }
  }

  async register(name: string, role: string, groups: string[]): Promise<Identity | null> {
    return this.guard(async () => {
      const creds = await this.client.register(name, role, groups);
      const identity: Identity = {
        address: creds.address,
        publicKey: creds.public_key,
        privateKey: creds.private_key,
        name: creds.name,
        role: creds.role,
      };
      this.session.adopt(identity);
      this.state.surface = "articles";
      await this.refreshArticles();
      return identity;
    });
  }

  signIn(identity: Identity): void {
    this.session.adopt(identity);
    this.state.surface = "articles";
  }

  async refreshArticles(): Promise<void> {
    await this.guard(async () => {
      const listing = await this.client.listArticles();
      this.state.articles = listing.articles;
      this.state.surface = "articles";
    });
  }

  async openArticle(articleId: string): Promise<void> {
    await this.guard(async () => {
      this.state.detail = await this.client.article(articleId);
      this.state.surface = "article";
    });
  }

  async upload(text: string, group: string, articleId?: string): Promise<void> {
    await this.guard(async () => {
      this.state.detail = await this.client.submitArticle(text, group, articleId);
      this.state.surface = "article";
    });
  }

  async startReview(quorum: number, ratio: string): Promise<void> {
    const detail = this.state.detail;
    if (!detail) return;
    await this.guard(async () => {
      this.state.detail = await this.client.startReview(detail.article_id, quorum, ratio);
    });
    await this.openArticle(detail.article_id);
  }

  async endorse(verdict: "favorable" | "unfavorable"): Promise<void> {
    const detail = this.state.detail;
    if (!detail) return;
    await this.guard(() => this.client.endorse(detail.article_id, verdict));
    await this.openArticle(detail.article_id);
  }

  async comment(kind: "comment" | "annotation", body: string): Promise<void> {
    const detail = this.state.detail;
    if (!detail) return;
    await this.guard(() => this.client.comment(detail.article_id, kind, body));
    await this.openArticle(detail.article_id);
  }

  async modify(text: string): Promise<void> {
    const detail = this.state.detail;
    if (!detail) return;
    await this.guard(() => this.client.modify(detail.article_id, text));
    await this.openArticle(detail.article_id);
  }

  async openUserCenter(): Promise<void> {
    await this.guard(async () => {
      this.state.user = await this.client.userInfo(this.session.address);
      this.state.surface = "user";
    });
  }

  async openSystemInfo(): Promise<void> {
    await this.guard(async () => {
      this.state.health = await this.client.health();
      this.state.verify = await this.client.chainVerify();
      this.state.surface = "system";
    });
  }

  render(): string {
    const banner = errorBanner(this.state.error);
    const nav = this.session.current
      ? `<nav class="topnav">
          <span class="whoami">${this.session.name}</span>
          <a href="#articles">files</a>
          <a href="#upload">upload</a>
          <a href="#user">user center</a>
          <a href="#system">system</a>
        </nav>`
      : "";
    let body: string;
    switch (this.state.surface) {
      case "login":
        body = loginView();
        break;
      case "articles":
        body = articleListView(this.state.articles, this.session.current?.address ?? "");
        break;
      case "upload":
        body = uploadView(this.state.user?.groups ?? ["g1"]);
        break;
      case "article":
        body = this.state.detail
          ? articleDetailView(this.state.detail, this.session.current?.address ?? "")
          : `<p class="empty">no article loaded</p>`;
        break;
      case "user":
        body = this.state.user ? userCenterView(this.state.user) : `<p class="empty">loading</p>`;
        break;
      case "system":
        body =
          this.state.health && this.state.verify
            ? systemInfoView(this.state.health, this.state.verify)
            : `<p class="empty">loading</p>`;
        break;
    }
    return `${nav}${banner}${body}`;
  }
}
