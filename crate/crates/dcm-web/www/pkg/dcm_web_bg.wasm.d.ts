/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_trainerdemo_free: (a: number, b: number) => void;
export const nurbs_circle_demo: (a: number, b: number, c: number) => [number, number, number, number];
export const sample_domain_demo: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const trainerdemo_error_field: (a: number, b: number) => [number, number];
export const trainerdemo_estimate: (a: number, b: number) => [number, number, number, number];
export const trainerdemo_field: (a: number, b: number) => [number, number];
export const trainerdemo_iterations: (a: number) => number;
export const trainerdemo_loss: (a: number) => number;
export const trainerdemo_n_bnd: (a: number) => number;
export const trainerdemo_n_int: (a: number) => number;
export const trainerdemo_new: (a: number, b: number, c: number) => [number, number, number];
export const trainerdemo_polish: (a: number, b: number) => [number, number, number];
export const trainerdemo_step_adam: (a: number, b: number, c: number) => [number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __wbindgen_start: () => void;
