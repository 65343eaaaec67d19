// SM2 signatures over the recommended 256-bit prime curve, implemented with
// native bigints. Nonces are derived deterministically with HMAC-SM3 using
// the same construction as the platform node, so a given (key, message)
// produces byte-identical signatures on both sides of the wire; the shared
// vector file pins that equivalence in tests.
import { bigintToBytes, bytesToBigint, concatBytes, utf8ToBytes } from "./bytes.js";
import { hmacSm3, sm3 } from "./sm3.js";

export const P = BigInt("0xFFFFFFFEFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFF00000000FFFFFFFFFFFFFFFF");
export const A = BigInt("0xFFFFFFFEFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFFF00000000FFFFFFFFFFFFFFFC");
export const B = BigInt("0x28E9FA9E9D9F5E344D5A9E4BCF6509A7F39789F515AB8F92DDBCBD414D940E93");
export const N = BigInt("0xFFFFFFFEFFFFFFFFFFFFFFFFFFFFFFFF7203DF6B21C6052B53BBF40939D54123");
export const GX = BigInt("0x32C4AE2C1F1981195F9904466A39C9948FE30BBFF2660BE1715A4589334C74C7");
export const GY = BigInt("0xBC3736A2F4F6779C59BDCEE36B692153D0A9877CC62A474002DF32E52139F0A0");

export const DEFAULT_USER_ID = utf8ToBytes("1234567812345678");

type Affine = { x: bigint; y: bigint } | null;
type Jacobian = { x: bigint; y: bigint; z: bigint };

const INF: Jacobian = { x: 0n, y: 1n, z: 0n };

function mod(a: bigint, m: bigint): bigint {
  const r = a % m;
  return r < 0n ? r + m : r;
}

function modPow(base: bigint, exp: bigint, m: bigint): bigint {
  let result = 1n;
  let b = mod(base, m);
  let e = exp;
  while (e > 0n) {
    if (e & 1n) result = (result * b) % m;
    b = (b * b) % m;
    e >>= 1n;
  }
  return result;
}

function inv(x: bigint, m: bigint): bigint {
  return modPow(x, m - 2n, m);
}

function jDouble(pt: Jacobian): Jacobian {
  if (pt.z === 0n || pt.y === 0n) return INF;
  const a = mod(pt.x * pt.x, P);
  const b = mod(pt.y * pt.y, P);
  const c = mod(b * b, P);
  const xb = pt.x + b;
  const d = mod(2n * (xb * xb - a - c), P);
  const z2 = mod(pt.z * pt.z, P);
  const e = mod(3n * a + ((A * z2) % P) * z2, P);
  const x3 = mod(e * e - 2n * d, P);
  const y3 = mod(e * (d - x3) - 8n * c, P);
  const z3 = mod(2n * pt.y * pt.z, P);
  return { x: x3, y: y3, z: z3 };
}

function jAdd(p: Jacobian, q: Jacobian): Jacobian {
  if (p.z === 0n) return q;
  if (q.z === 0n) return p;
  const z1z1 = mod(p.z * p.z, P);
  const z2z2 = mod(q.z * q.z, P);
  const u1 = mod(p.x * z2z2, P);
  const u2 = mod(q.x * z1z1, P);
  const s1 = mod(p.y * q.z * z2z2, P);
  const s2 = mod(q.y * p.z * z1z1, P);
  if (u1 === u2) {
    if (s1 !== s2) return INF;
    return jDouble(p);
  }
  const h = mod(u2 - u1, P);
  const i = mod(4n * h * h, P);
  const j = mod(h * i, P);
  const r = mod(2n * (s2 - s1), P);
  const v = mod(u1 * i, P);
  const x3 = mod(r * r - j - 2n * v, P);
  const y3 = mod(r * (v - x3) - 2n * s1 * j, P);
  const zs = p.z + q.z;
  const z3 = mod((zs * zs - z1z1 - z2z2) * h, P);
  return { x: x3, y: y3, z: z3 };
}

function toAffine(pt: Jacobian): Affine {
  if (pt.z === 0n) return null;
  const zi = inv(pt.z, P);
  const zi2 = (zi * zi) % P;
  return { x: mod(pt.x * zi2, P), y: mod(pt.y * zi2 * zi, P) };
}

function scalarMult(point: Affine, k: bigint): Affine {
  let scalar = mod(k, N);
  if (scalar === 0n || point === null) return null;
  let acc = INF;
  let addend: Jacobian = { x: point.x, y: point.y, z: 1n };
  while (scalar > 0n) {
    if (scalar & 1n) acc = jAdd(acc, addend);
    addend = jDouble(addend);
    scalar >>= 1n;
  }
  return toAffine(acc);
}

export function isOnCurve(point: Affine): boolean {
  if (point === null) return false;
  const { x, y } = point;
  if (x < 0n || x >= P || y < 0n || y >= P) return false;
  return mod(y * y - (x * x * x + A * x + B), P) === 0n;
}

export function decodePoint(encoded: Uint8Array): { x: bigint; y: bigint } {
  if (encoded.length !== 65 || encoded[0] !== 0x04) {
    throw new Error("public key must be a 65-byte uncompressed point");
  }
  const point = {
    x: bytesToBigint(encoded.slice(1, 33)),
    y: bytesToBigint(encoded.slice(33)),
  };
  if (!isOnCurve(point)) throw new Error("point is not on the curve");
  return point;
}

export function encodePoint(point: { x: bigint; y: bigint }): Uint8Array {
  return concatBytes(new Uint8Array([0x04]), bigintToBytes(point.x, 32), bigintToBytes(point.y, 32));
}

export function publicFromPrivate(d: bigint): { x: bigint; y: bigint } {
  if (d < 1n || d > N - 2n) throw new Error("private key out of range");
  const point = scalarMult({ x: GX, y: GY }, d);
  if (point === null) throw new Error("degenerate public point");
  return point;
}

function za(userId: Uint8Array, pub: { x: bigint; y: bigint }): Uint8Array {
  const entl = userId.length * 8;
  return sm3(
    concatBytes(
      new Uint8Array([(entl >> 8) & 0xff, entl & 0xff]),
      userId,
      bigintToBytes(A, 32),
      bigintToBytes(B, 32),
      bigintToBytes(GX, 32),
      bigintToBytes(GY, 32),
      bigintToBytes(pub.x, 32),
      bigintToBytes(pub.y, 32),
    ),
  );
}

function deriveNonce(d: bigint, eBytes: Uint8Array, retry: number, entropy: Uint8Array): bigint {
  const x = bigintToBytes(d, 32);
  const suffix = retry > 0 ? new Uint8Array([(retry >> 8) & 0xff, retry & 0xff]) : new Uint8Array(0);
  let v: Uint8Array = new Uint8Array(32).fill(0x01);
  let key: Uint8Array = new Uint8Array(32);
  key = hmacSm3(key, concatBytes(v, new Uint8Array([0x00]), x, eBytes, suffix, entropy));
  v = hmacSm3(key, v);
  key = hmacSm3(key, concatBytes(v, new Uint8Array([0x01]), x, eBytes, suffix, entropy));
  v = hmacSm3(key, v);
  for (;;) {
    v = hmacSm3(key, v);
    const k = bytesToBigint(v);
    if (k >= 1n && k <= N - 1n) return k;
    key = hmacSm3(key, concatBytes(v, new Uint8Array([0x00])));
    v = hmacSm3(key, v);
  }
}

/**
 * Sign a message. With no entropy the nonce derivation is fully
 * deterministic (reproducible vectors); callers that may legitimately sign
 * identical bytes twice, like request signing, pass fresh entropy so each
 * signature is unique and the server's replay cache only trips on true
 * byte-replays.
 */
export function sign(
  message: Uint8Array,
  privateKey: Uint8Array,
  publicKey: Uint8Array,
  userId: Uint8Array = DEFAULT_USER_ID,
  entropy: Uint8Array = new Uint8Array(0),
): Uint8Array {
  const d = bytesToBigint(privateKey);
  if (d < 1n || d > N - 2n) throw new Error("private key out of range");
  const pub = decodePoint(publicKey);
  const eBytes = sm3(concatBytes(za(userId, pub), message));
  const e = bytesToBigint(eBytes);
  for (let retry = 0; retry < 64; retry++) {
    const k = deriveNonce(d, eBytes, retry, entropy);
    const kg = scalarMult({ x: GX, y: GY }, k);
    if (kg === null) continue;
    const r = mod(e + kg.x, N);
    if (r === 0n || mod(r + k, N) === 0n) continue;
    const s = mod(inv(1n + d, N) * mod(k - r * d, N), N);
    if (s === 0n) continue;
    return concatBytes(bigintToBytes(r, 32), bigintToBytes(s, 32));
  }
  throw new Error("nonce derivation failed to produce a usable signature");
}

export function verify(
  signature: Uint8Array,
  message: Uint8Array,
  publicKey: Uint8Array,
  userId: Uint8Array = DEFAULT_USER_ID,
): boolean {
  if (signature.length !== 64) return false;
  let pub: { x: bigint; y: bigint };
  try {
    pub = decodePoint(publicKey);
  } catch {
    return false;
  }
  const r = bytesToBigint(signature.slice(0, 32));
  const s = bytesToBigint(signature.slice(32));
  if (r < 1n || r > N - 1n || s < 1n || s > N - 1n) return false;
  const t = mod(r + s, N);
  if (t === 0n) return false;
  const e = bytesToBigint(sm3(concatBytes(za(userId, pub), message)));
  const sg = scalarMult({ x: GX, y: GY }, s);
  const tp = scalarMult(pub, t);
  if (sg === null && tp === null) return false;
  const sum = toAffine(
    jAdd(
      sg === null ? INF : { x: sg.x, y: sg.y, z: 1n },
      tp === null ? INF : { x: tp.x, y: tp.y, z: 1n },
    ),
  );
  if (sum === null) return false;
  return mod(e + sum.x, N) === r;
}

export function deriveAddress(publicKey: Uint8Array): Uint8Array {
  if (publicKey.length !== 65 || publicKey[0] !== 0x04) {
    throw new Error("public key must be a 65-byte uncompressed point");
  }
  return sm3(publicKey).slice(0, 20);
}
