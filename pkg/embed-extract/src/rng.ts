// rng.ts - counter-based splitmix64, the only randomness source in this package.
//
// Every stream is a pure function of (seed, index): draw i is
// mix(seed + (i+1) * golden), which reproduces the reference splitmix64
// output sequence for the same seed. Pure counters mean any value can be
// replayed later without carrying generator state around, which is what
// makes whole extraction runs byte-reproducible.

const MASK = 0xffffffffffffffffn;
const GOLDEN = 0x9e3779b97f4a7c15n;

function mix(state: bigint): bigint {
  let z = state & MASK;
  z = ((z ^ (z >> 30n)) * 0xbf58476d1ce4e5b9n) & MASK;
  z = ((z ^ (z >> 27n)) * 0x94d049bb133111ebn) & MASK;
  return z ^ (z >> 31n);
}

/** Draw the i-th 64-bit word of the stream keyed by seed. */
export function splitmix64(seed: bigint, index: number): bigint {
  return mix((seed & MASK) + BigInt(index + 1) * GOLDEN);
}

/** Draw the i-th double in (0, 1]: top 53 bits, never exactly zero. */
export function uniform01(seed: bigint, index: number): number {
  const z = splitmix64(seed, index);
  return Number((z >> 11n) + 1n) * 2 ** -53;
}

/** 64-bit FNV-1a over UTF-16 code units; stable across platforms. */
export function hashString(text: string): bigint {
  let h = 0xcbf29ce484222325n;
  for (let i = 0; i < text.length; i++) {
    h = ((h ^ BigInt(text.charCodeAt(i))) * 0x100000001b3n) & MASK;
  }
  return h;
}

/** Fold a label into a seed so sub-streams cannot collide with the parent. */
export function deriveSeed(base: bigint, label: string): bigint {
  return mix((base & MASK) ^ hashString(label));
}

/** Deterministic permutation of 0..n-1 (Fisher-Yates over the counter stream). */
export function shuffled(n: number, seed: bigint): number[] {
  const order = Array.from({ length: n }, (_, i) => i);
  for (let i = n - 1; i > 0; i--) {
    const j = Number(splitmix64(seed, n - 1 - i) % BigInt(i + 1));
    const tmp = order[i];
    order[i] = order[j];
    order[j] = tmp;
  }
  return order;
}
