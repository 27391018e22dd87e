/* tslint:disable */
/* eslint-disable */

/**
 * JSON with the rescaled top-1 statistics, the GOE reference and their KS distance.
 */
export function edge_histogram(n: number, c1: number, c2: number, trials: number, seed: bigint, law: string, beta: number): string;

/**
 * `[λ−, λ+, c_TW]`.
 */
export function model_edges(c1: number, c2: number): Float64Array;

/**
 * Sample canonical correlation eigenvalues for one seeded draw, descending.
 */
export function simulated_spectrum(n: number, c1: number, c2: number, seed: bigint, law: string, beta: number): Float64Array;

/**
 * Interleaved `x, f(x)` pairs on a uniform grid over `[λ−, λ+]`.
 */
export function wachter_curve(c1: number, c2: number, points: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly edge_histogram: (a: number, b: number, c: number, d: number, e: bigint, f: number, g: number, h: number) => [number, number, number, number];
    readonly model_edges: (a: number, b: number) => [number, number, number, number];
    readonly simulated_spectrum: (a: number, b: number, c: number, d: bigint, e: number, f: number, g: number) => [number, number, number, number];
    readonly wachter_curve: (a: number, b: number, c: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
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
