/* tslint:disable */
/* eslint-disable */

/**
 * One random instance with its cost table.
 */
export class Demo {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Edges as a flat `[i, j, w, i, j, w, ...]` array.
     */
    edges(): Float64Array;
    /**
     * Normalised expectation over a `steps × steps` grid of `(γ, t)`.
     */
    landscape(p: number, beta: number, steps: number): string;
    n(): number;
    constructor(n: number, seed: number, edge_prob: number);
    /**
     * Optimises from the default start and compares with Grover search.
     */
    optimize(p: number): string;
    /**
     * Output distribution over cut values at the given schedule.
     */
    simulate(p: number, gamma: number, t: number, beta: number): string;
}

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_demo_free: (a: number, b: number) => void;
    readonly demo_edges: (a: number) => [number, number];
    readonly demo_landscape: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly demo_n: (a: number) => number;
    readonly demo_new: (a: number, b: number, c: number) => [number, number, number];
    readonly demo_optimize: (a: number, b: number) => [number, number, number, number];
    readonly demo_simulate: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __externref_table_dealloc: (a: number) => void;
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
