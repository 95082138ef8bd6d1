/* tslint:disable */
/* eslint-disable */

/**
 * Live trainer: Poisson on the unit disc (source 12xy, exact solution
 * xy(1 - r^2)) with a small network, stepped from the page.
 */
export class TrainerDemo {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Pointwise |u_theta - U| on the same grid.
     */
    error_field(n: number): Float64Array;
    /**
     * Goal-error estimation for J(u) = int u dx: train a small adjoint,
     * assemble eta, and compare with the true error; returns JSON with
     * J values, eta, e, and the effectivity index.
     */
    estimate(adjoint_iters: number): string;
    /**
     * Field values on an `n x n` bounding-box grid, row-major; NaN outside
     * the domain (for heatmap rendering).
     */
    field(n: number): Float64Array;
    iterations(): number;
    loss(): number;
    n_bnd(): number;
    n_int(): number;
    constructor(seed: number, grid: number, width: number);
    /**
     * Polish with BFGS for up to `n` iterations; returns the final loss.
     */
    polish(n: number): number;
    /**
     * Run `n` Adam steps (persistent moments); returns the latest loss.
     */
    step_adam(n: number, lr: number): number;
}

/**
 * Evaluate the rational quadratic unit circle after scaling one control
 * weight and inserting a knot; returns curve samples, the control net, and
 * the worst radius deviation as JSON.
 */
export function nurbs_circle_demo(weight_scale: number, insert_at: number, samples: number): string;

/**
 * Sample a collocation set on one of the example domains; returns interior
 * points and boundary points with outward normals and BC tags as JSON.
 */
export function sample_domain_demo(kind: string, nx: number, ny: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_trainerdemo_free: (a: number, b: number) => void;
    readonly nurbs_circle_demo: (a: number, b: number, c: number) => [number, number, number, number];
    readonly sample_domain_demo: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly trainerdemo_error_field: (a: number, b: number) => [number, number];
    readonly trainerdemo_estimate: (a: number, b: number) => [number, number, number, number];
    readonly trainerdemo_field: (a: number, b: number) => [number, number];
    readonly trainerdemo_iterations: (a: number) => number;
    readonly trainerdemo_loss: (a: number) => number;
    readonly trainerdemo_n_bnd: (a: number) => number;
    readonly trainerdemo_n_int: (a: number) => number;
    readonly trainerdemo_new: (a: number, b: number, c: number) => [number, number, number];
    readonly trainerdemo_polish: (a: number, b: number) => [number, number, number];
    readonly trainerdemo_step_adam: (a: number, b: number, c: number) => [number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
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
