// Cross-language signature compatibility: the vector file is generated by
// the platform node; signatures here must be byte-identical, not merely
// verifiable, because both sides derive nonces deterministically.
import { describe, expect, it } from "vitest";
import { readFileSync } from "node:fs";
import { deriveAddress, publicFromPrivate, encodePoint, sign, verify } from "../src/crypto/sm2.js";
import { bytesToBigint, bytesToHex, hexToBytes, utf8ToBytes } from "../src/crypto/bytes.js";
import { sm3 } from "../src/crypto/sm3.js";

const vectors = JSON.parse(
  readFileSync(new URL("./vectors/signing_vectors.json", import.meta.url), "utf-8"),
);

function requestDigest(method: string, path: string, timestamp: string, body: string): Uint8Array {
  return sm3(utf8ToBytes(`${method.toUpperCase()}\n${path}\n${timestamp}\n${body}`));
}

describe("sm2 against the shared vectors", () => {
  it("derives the same public keys and addresses", () => {
    for (const row of vectors.keys) {
      const pub = publicFromPrivate(bytesToBigint(hexToBytes(row.private_key)));
      expect(bytesToHex(encodePoint(pub))).toBe(row.public_key);
      expect(bytesToHex(deriveAddress(hexToBytes(row.public_key)))).toBe(row.address);
    }
  });

  it("reproduces request digests and signatures byte for byte", () => {
    for (const row of vectors.signed_requests) {
      const digest = requestDigest(row.method, row.path, row.timestamp, row.body_utf8);
      expect(bytesToHex(digest)).toBe(row.request_digest);
      const signature = sign(digest, hexToBytes(row.private_key), hexToBytes(row.public_key));
      expect(bytesToHex(signature)).toBe(row.signature);
      expect(verify(signature, digest, hexToBytes(row.public_key))).toBe(true);
    }
  });

  it("rejects altered messages and foreign keys", () => {
    const row = vectors.signed_requests[0];
    const digest = hexToBytes(row.request_digest);
    const signature = hexToBytes(row.signature);
    const altered = new Uint8Array(digest);
    altered[0] ^= 1;
    expect(verify(signature, altered, hexToBytes(row.public_key))).toBe(false);
    const otherKey = vectors.keys.find((k: { public_key: string }) => k.public_key !== row.public_key);
    expect(verify(signature, digest, hexToBytes(otherKey.public_key))).toBe(false);
    expect(verify(new Uint8Array(10), digest, hexToBytes(row.public_key))).toBe(false);
  });
});
