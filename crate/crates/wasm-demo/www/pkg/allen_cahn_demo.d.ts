/* tslint:disable */
/* eslint-disable */

export class Relaxation {
    free(): void;
    [Symbol.dispose](): void;
    energy(): number;
    finished(): boolean;
    iterations(): number;
    /**
     * Triple junctions of the current field, flattened `x, y` pairs.
     */
    junctions(): Float64Array;
    constructor(jump_angles: Float64Array, n: number, eps: number);
    /**
     * `[x, y, energy]` of the Steiner triod joining the jump points.
     */
    reference(): Float64Array;
    /**
     * RGBA pixels, top row first. Each node blends the phase colours by
     * closeness to the wells; outside the disk is transparent.
     */
    render(): Uint8Array;
    sigma(): number;
    /**
     * Grid nodes per side; the image is `size x size`.
     */
    size(): number;
    /**
     * Up to `count` descent steps; returns how many were taken.
     */
    step(count: number): number;
}

/**
 * Connection from the first to the second well: rows `t, U_1 .. U_m`
 * flattened, preceded by `m` and the action.
 */
export function connection_profile(kind: string): Float64Array;

/**
 * Fermat point of three points given as `[x1, y1, x2, y2, x3, y3]`;
 * returns `[x, y, total distance]`.
 */
export function steiner(xy: Float64Array): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_relaxation_free: (a: number, b: number) => void;
    readonly connection_profile: (a: number, b: number) => [number, number, number, number];
    readonly relaxation_energy: (a: number) => number;
    readonly relaxation_finished: (a: number) => number;
    readonly relaxation_iterations: (a: number) => number;
    readonly relaxation_junctions: (a: number) => [number, number];
    readonly relaxation_new: (a: number, b: number, c: number, d: number) => [number, number, number];
    readonly relaxation_reference: (a: number) => [number, number];
    readonly relaxation_render: (a: number) => [number, number];
    readonly relaxation_sigma: (a: number) => number;
    readonly relaxation_size: (a: number) => number;
    readonly relaxation_step: (a: number, b: number) => number;
    readonly steiner: (a: number, b: number) => [number, number];
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
