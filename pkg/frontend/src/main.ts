// Browser bootstrap: mount the app, route on hash changes, and delegate
// form submissions and clicks to controller actions.
import { App } from "./app.js";

const BASE_URL = (window as unknown as { CHAINREVIEW_API?: string }).CHAINREVIEW_API ?? "";

const app = new App(BASE_URL, window.localStorage);
const root = document.getElementById("app") as HTMLElement;

function paint(): void {
  root.innerHTML = app.render();
}

async function route(): Promise<void> {
  const hash = window.location.hash.slice(1);
  if (!app.session.current) {
    app.state.surface = "login";
  } else if (hash.startsWith("article/")) {
    await app.openArticle(hash.slice("article/".length));
  } else if (hash === "upload") {
    await app.openUserCenter(); // groups for the form
    app.state.surface = "upload";
  } else if (hash === "user") {
    await app.openUserCenter();
  } else if (hash === "system") {
    await app.openSystemInfo();
  } else {
    await app.refreshArticles();
  }
  paint();
}

root.addEventListener("submit", (event) => {
  const form = event.target as HTMLFormElement;
  const action = form.dataset.action;
  if (!action) return;
  event.preventDefault();
  const fields = new FormData(form);
  const value = (name: string) => String(fields.get(name) ?? "");
  void (async () => {
    switch (action) {
      case "register":
        await app.register(
          value("alias"),
          value("role"),
          value("groups").split(",").map((g) => g.trim()).filter(Boolean),
        );
        break;
      case "import":
        app.signIn(JSON.parse(value("credentials")));
        await app.refreshArticles();
        break;
      case "upload":
        await app.upload(value("text"), value("group"), value("article_id") || undefined);
        break;
      case "start-review":
        await app.startReview(Number(value("quorum")), value("ratio"));
        break;
      case "comment":
        await app.comment(value("kind") as "comment" | "annotation", value("body"));
        break;
      case "modify":
        await app.modify(value("text"));
        break;
    }
    paint();
  })();
});

root.addEventListener("click", (event) => {
  const button = (event.target as HTMLElement).closest("button[data-action=endorse]");
  if (!button) return;
  event.preventDefault();
  void app
    .endorse((button as HTMLElement).dataset.verdict as "favorable" | "unfavorable")
    .then(paint);
});

window.addEventListener("hashchange", () => void route());
void route();
