/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_relaxation_free: (a: number, b: number) => void;
export const connection_profile: (a: number, b: number) => [number, number, number, number];
export const relaxation_energy: (a: number) => number;
export const relaxation_finished: (a: number) => number;
export const relaxation_iterations: (a: number) => number;
export const relaxation_junctions: (a: number) => [number, number];
export const relaxation_new: (a: number, b: number, c: number, d: number) => [number, number, number];
export const relaxation_reference: (a: number) => [number, number];
export const relaxation_render: (a: number) => [number, number];
export const relaxation_sigma: (a: number) => number;
export const relaxation_size: (a: number) => number;
export const relaxation_step: (a: number, b: number) => number;
export const steiner: (a: number, b: number) => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
