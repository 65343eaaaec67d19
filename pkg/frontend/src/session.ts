// Client-side identity. The private key lives only in the provided storage
// (browser localStorage in production, an in-memory map in tests); every
// mutating call is signed locally and the key bytes never enter a request.
import { bytesToHex, hexToBytes, utf8ToBytes } from "./crypto/bytes.js";
import { sm3 } from "./crypto/sm3.js";
import { sign } from "./crypto/sm2.js";

export interface KeyStore {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
  removeItem(key: string): void;
}

export interface Identity {
  address: string;
  publicKey: string;
  privateKey: string;
  name: string;
  role: string;
}

const STORE_KEY = "chainreview.identity";

export class ClientSession {
  private identity: Identity | null = null;

  constructor(private store: KeyStore) {
    const raw = store.getItem(STORE_KEY);
    if (raw) this.identity = JSON.parse(raw) as Identity;
  }

  get current(): Identity | null {
    return this.identity;
  }

  get address(): string {
    if (!this.identity) throw new Error("no active session");
    return this.identity.address;
  }

  get name(): string {
    return this.identity?.name ?? "";
  }

  adopt(identity: Identity): void {
    this.identity = identity;
    this.store.setItem(STORE_KEY, JSON.stringify(identity));
  }

  clear(): void {
    this.identity = null;
    this.store.removeItem(STORE_KEY);
  }

  requestDigest(method: string, path: string, timestamp: string, body: Uint8Array): Uint8Array {
    const encoder = new TextEncoder();
    const parts = [
      encoder.encode(method.toUpperCase()),
      encoder.encode("\n"),
      encoder.encode(path),
      encoder.encode("\n"),
      encoder.encode(timestamp),
      encoder.encode("\n"),
    ];
    const total = parts.reduce((n, p) => n + p.length, 0) + body.length;
    const message = new Uint8Array(total);
    let offset = 0;
    for (const part of parts) {
      message.set(part, offset);
      offset += part.length;
    }
    message.set(body, offset);
    return sm3(message);
  }

  signedHeaders(method: string, path: string, body: string): Record<string, string> {
    if (!this.identity) throw new Error("no active session");
    const timestamp = String(Math.floor(Date.now() / 1000));
    const digest = this.requestDigest(method, path, timestamp, utf8ToBytes(body));
    // Fresh nonce entropy: re-issuing an identical request in the same
    // second must still produce a distinct signature, or the gateway's
    // replay cache would reject an honest client.
    const entropy = globalThis.crypto.getRandomValues(new Uint8Array(32));
    const signature = sign(
      digest,
      hexToBytes(this.identity.privateKey),
      hexToBytes(this.identity.publicKey),
      undefined,
      entropy,
    );
    return {
      "X-BR-Identity": this.identity.address,
      "X-BR-Timestamp": timestamp,
      "X-BR-Signature": bytesToHex(signature),
    };
  }
}
