// SM3 hash, 32-byte digests. Mirrors the byte layout the gateway hashes, so
// request digests computed here match the server bit for bit.
import { concatBytes } from "./bytes.js";

const IV = [
  0x7380166f, 0x4914b2b9, 0x172442d7, 0xda8a0600, 0xa96f30bc, 0x163138aa,
  0xe38dee4d, 0xb0fb0e4e,
];

function rotl(x: number, n: number): number {
  n &= 31;
  if (n === 0) return x >>> 0;
  return ((x << n) | (x >>> (32 - n))) >>> 0;
}

function p0(x: number): number {
  return (x ^ rotl(x, 9) ^ rotl(x, 17)) >>> 0;
}

function p1(x: number): number {
  return (x ^ rotl(x, 15) ^ rotl(x, 23)) >>> 0;
}

function compress(v: number[], block: Uint8Array, offset: number): number[] {
  const w = new Array<number>(68);
  for (let i = 0; i < 16; i++) {
    const o = offset + 4 * i;
    w[i] = ((block[o] << 24) | (block[o + 1] << 16) | (block[o + 2] << 8) | block[o + 3]) >>> 0;
  }
  for (let j = 16; j < 68; j++) {
    w[j] = (p1((w[j - 16] ^ w[j - 9] ^ rotl(w[j - 3], 15)) >>> 0) ^ rotl(w[j - 13], 7) ^ w[j - 6]) >>> 0;
  }
  let [a, b, c, d, e, f, g, h] = v;
  for (let j = 0; j < 64; j++) {
    const tj = j < 16 ? 0x79cc4519 : 0x7a879d8a;
    const ff = j < 16 ? (a ^ b ^ c) >>> 0 : ((a & b) | (a & c) | (b & c)) >>> 0;
    const gg = j < 16 ? (e ^ f ^ g) >>> 0 : ((e & f) | (~e & g)) >>> 0;
    const a12 = rotl(a, 12);
    const ss1 = rotl((a12 + e + rotl(tj, j % 32)) >>> 0, 7);
    const ss2 = (ss1 ^ a12) >>> 0;
    const tt1 = (ff + d + ss2 + ((w[j] ^ w[j + 4]) >>> 0)) >>> 0;
    const tt2 = (gg + h + ss1 + w[j]) >>> 0;
    d = c;
    c = rotl(b, 9);
    b = a;
    a = tt1;
    h = g;
    g = rotl(f, 19);
    f = e;
    e = p0(tt2);
  }
  return [
    (v[0] ^ a) >>> 0, (v[1] ^ b) >>> 0, (v[2] ^ c) >>> 0, (v[3] ^ d) >>> 0,
    (v[4] ^ e) >>> 0, (v[5] ^ f) >>> 0, (v[6] ^ g) >>> 0, (v[7] ^ h) >>> 0,
  ];
}

export function sm3(data: Uint8Array): Uint8Array {
  const bitLen = data.length * 8;
  const padLen = (56 - ((data.length + 1) % 64) + 64) % 64;
  const padded = new Uint8Array(data.length + 1 + padLen + 8);
  padded.set(data);
  padded[data.length] = 0x80;
  const view = new DataView(padded.buffer);
  view.setUint32(padded.length - 8, Math.floor(bitLen / 2 ** 32));
  view.setUint32(padded.length - 4, bitLen >>> 0);
  let v = IV.slice();
  for (let offset = 0; offset < padded.length; offset += 64) {
    v = compress(v, padded, offset);
  }
  const out = new Uint8Array(32);
  const outView = new DataView(out.buffer);
  v.forEach((word, i) => outView.setUint32(4 * i, word));
  return out;
}

export function hmacSm3(key: Uint8Array, message: Uint8Array): Uint8Array {
  const block = 64;
  let k = key.length > block ? sm3(key) : key;
  const padded = new Uint8Array(block);
  padded.set(k);
  const outer = padded.map((b) => b ^ 0x5c);
  const inner = padded.map((b) => b ^ 0x36);
  return sm3(concatBytes(outer, sm3(concatBytes(inner, message))));
}
