/* tslint:disable */
/* eslint-disable */

/**
 * Interpolates a base distribution with a cache softmax under a gate.
 */
export function mix(p_nmt: Float64Array, scores: Float64Array, cache_ids: Uint32Array, gate_logit: number): string;

/**
 * Sections and sentences of a wikitext-lite article.
 */
export function parse(raw: string, lang: string): string;

/**
 * Trains a small topic model and prefixes each sentence with its unit's tag.
 */
export function tag(raw: string, lang: string, k: number, alpha: number, iterations: number, seed: number, document_level: boolean, with_training: boolean): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly mix: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number];
    readonly parse: (a: number, b: number, c: number, d: number) => [number, number];
    readonly tag: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number, j: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
