// Pure render functions: application state in, HTML string out. Every piece
// of visible state comes from API responses; nothing is rendered
// optimistically for chain-backed values.
import type {
  ApiError,
  ArticleDetail,
  ArticleSummaryRow,
  CommentRow,
  HealthInfo,
  UserInfo,
  VerifyInfo,
} from "./api/client.js";

export const FLAG_LABELS: Record<number, string> = {
  0: "not in review",
  1: "in review",
  2: "review finished",
};

function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function flagBadge(flag: number): string {
  return `<span class="flag-badge flag-${flag}" data-flag="${flag}">${FLAG_LABELS[flag] ?? "?"}</span>`;
}

export function errorBanner(error: ApiError | null): string {
  if (!error) return "";
  const tamper = error.code === "tamper_alarm";
  return `<div class="banner ${tamper ? "banner-tamper" : "banner-error"}" data-code="${esc(error.code)}">
    ${tamper ? "<strong>TAMPER ALARM</strong> " : ""}${esc(error.message)}
  </div>`;
}

export function loginView(): string {
  return `<section class="view view-login">
    <h1>chainreview</h1>
    <p>Pick an alias. It does not need to relate to your real identity;
    a fresh key pair will identify you on the platform.</p>
    <form data-action="register">
      <input name="alias" placeholder="alias, e.g. Reviewer-7" maxlength="64" required>
      <select name="role">
        <option value="scholar">scholar</option>
        <option value="expert">expert</option>
      </select>
      <input name="groups" placeholder="authority groups, comma separated">
      <button type="submit">Register</button>
    </form>
    <form data-action="import">
      <p>Returning? Paste your saved credentials JSON:</p>
      <textarea name="credentials" rows="3"></textarea>
      <button type="submit">Sign in</button>
    </form>
  </section>`;
}

export function articleListView(rows: ArticleSummaryRow[], selfAddress: string): string {
  const body = rows.length
    ? rows
        .map(
          (row) => `<tr data-article="${esc(row.article_id)}">
        <td><a href="#article/${esc(row.article_id)}">${esc(row.article_id)}</a></td>
        <td>${esc(row.group)}</td>
        <td>${flagBadge(row.state_flag)}</td>
        <td>v${row.version}</td>
        <td>${row.uploader === selfAddress ? "you" : esc(row.uploader.slice(0, 12))}</td>
        <td>${esc(row.access)}</td>
      </tr>`,
        )
        .join("")
    : `<tr><td colspan="6" class="empty">no articles visible to this identity</td></tr>`;
  return `<section class="view view-articles">
    <h2>Files</h2>
    <table class="article-table">
      <thead><tr><th>article</th><th>group</th><th>status</th><th>version</th><th>uploader</th><th>access</th></tr></thead>
      <tbody>${body}</tbody>
    </table>
    <a href="#upload" class="button">Upload an article</a>
  </section>`;
}

export function uploadView(groups: string[]): string {
  const options = groups.map((g) => `<option value="${esc(g)}">${esc(g)}</option>`).join("");
  return `<section class="view view-upload">
    <h2>Upload</h2>
    <p>The platform will draft an abstract through summarizer consensus,
    record the content digest on chain, and store only ciphertext.</p>
    <form data-action="upload">
      <input name="article_id" placeholder="article id (optional)">
      <select name="group">${options}</select>
      <textarea name="text" rows="14" placeholder="article text" required></textarea>
      <button type="submit">Submit for the record</button>
    </form>
  </section>`;
}

function endorsementPanel(detail: ArticleDetail, selfAddress: string): string {
  const cast = detail.endorsements
    .map(
      (row) =>
        `<li data-expert="${esc(row.expert)}">${esc(row.expert.slice(0, 12))}: <em>${esc(row.verdict)}</em></li>`,
    )
    .join("");
  const thresholds = detail.thresholds
    ? `<p class="thresholds">pass rule: ${detail.thresholds.expert_quorum} favorable,
       participation ${esc(detail.thresholds.participation_ratio)} of ${detail.eligible_experts} eligible</p>`
    : "";
  const voteButtons =
    detail.state_flag === 1
      ? `<div class="vote">
      <button data-action="endorse" data-verdict="favorable">Endorse: favorable</button>
      <button data-action="endorse" data-verdict="unfavorable">Endorse: unfavorable</button>
    </div>`
      : "";
  const startButton =
    detail.state_flag === 0 && detail.uploader === selfAddress
      ? `<form data-action="start-review">
      <input name="quorum" type="number" min="1" value="2"> favorable, participation
      <input name="ratio" value="1/2" size="4">
      <button type="submit">Start review</button>
    </form>`
      : "";
  return `<div class="endorsement-panel">
    <h3>Review ${flagBadge(detail.state_flag)}</h3>
    ${thresholds}
    <ul class="verdicts">${cast}</ul>
    ${voteButtons}
    ${startButton}
  </div>`;
}

function commentsBlock(comments: CommentRow[]): string {
  const rows = comments
    .map(
      (c) => `<li class="comment comment-${esc(c.kind)}" data-comment="${esc(c.comment_id)}">
      <strong>${esc(c.author_name)}</strong> <em>(${esc(c.kind)})</em>: ${esc(c.body)}
      <code class="digest">${esc(c.digest.slice(0, 16))}</code>
    </li>`,
    )
    .join("");
  return `<div class="comments">
    <h3>Comments &amp; annotations (${comments.length})</h3>
    <ul>${rows}</ul>
    <form data-action="comment">
      <select name="kind"><option value="comment">comment</option><option value="annotation">annotation</option></select>
      <input name="body" placeholder="say something durable" required>
      <button type="submit">Post</button>
    </form>
  </div>`;
}

function historyBlock(detail: ArticleDetail): string {
  if (!detail.modification_log.length) return "";
  const rows = detail.modification_log
    .map(
      (m, i) => `<li>v${i + 2} by ${esc(m.modifier.slice(0, 12))} at tick ${m.time},
      digest <code>${esc(m.new_digest.slice(0, 16))}</code></li>`,
    )
    .join("");
  return `<div class="history"><h3>Modification history</h3><ol>${rows}</ol></div>`;
}

export function articleDetailView(detail: ArticleDetail, selfAddress: string): string {
  const abstractBlock = detail.abstract
    ? `<div class="abstract"><h3>Abstract</h3><p>${esc(detail.abstract)}</p></div>`
    : "";
  const textBlock = detail.text
    ? `<div class="fulltext"><h3>Full text</h3><pre>${esc(detail.text)}</pre>
       <form data-action="modify"><textarea name="text" rows="8">${esc(detail.text)}</textarea>
       <button type="submit">Store modification</button></form></div>`
    : detail.access === "abstract"
      ? `<p class="locked">Full text locked until the review finishes.</p>`
      : `<p class="locked">Only metadata is visible before review starts.</p>`;
  return `<section class="view view-article" data-article="${esc(detail.article_id)}" data-access="${esc(detail.access)}">
    <h2>${esc(detail.article_id)} ${flagBadge(detail.state_flag)}</h2>
    <p class="meta">group ${esc(detail.group)} · version ${detail.version} ·
      digest <code>${esc(detail.plaintext_digest.slice(0, 16))}</code></p>
    ${endorsementPanel(detail, selfAddress)}
    ${abstractBlock}
    ${textBlock}
    ${detail.comments ? commentsBlock(detail.comments) : ""}
    ${historyBlock(detail)}
  </section>`;
}

export function userCenterView(info: UserInfo): string {
  return `<section class="view view-user">
    <h2>User center</h2>
    <dl>
      <dt>alias</dt><dd class="alias">${esc(info.name)}</dd>
      <dt>address</dt><dd><code>${esc(info.address)}</code></dd>
      <dt>role</dt><dd>${esc(info.role)}</dd>
      <dt>groups</dt><dd>${info.groups.map(esc).join(", ") || "none"}</dd>
      <dt>balance</dt><dd class="balance">${info.balance}</dd>
      <dt>funded</dt><dd>${info.granted ? "yes" : "no"}</dd>
    </dl>
  </section>`;
}

export function systemInfoView(health: HealthInfo, verify: VerifyInfo): string {
  const indicator = verify.ok
    ? `<span class="chain-ok" data-verified="true">chain verified</span>`
    : `<span class="chain-broken" data-verified="false">CHAIN BROKEN at block ${verify.broken_at}: ${esc(verify.reason ?? "")}</span>`;
  return `<section class="view view-system">
    <h2>System information</h2>
    <p>height ${health.height} · ${indicator}</p>
    <p>state root <code>${esc(health.state_root)}</code></p>
  </section>`;
}
