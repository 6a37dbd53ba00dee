/* tslint:disable */
/* eslint-disable */

/**
 * Filters an RGBA image (alpha ignored) and returns RGBA bytes.
 */
export function filter_rgba(rgba: Uint8Array, width: number, height: number, preset: string, sigma_s: number, sigma_c: number, exact: boolean): Uint8Array;

/**
 * Metric suite against noise level: rows of
 * `noise, epe3d, acc3ds, acc3dr, outlier3d, epe2d, acc2d`.
 */
export function metrics_curve(points: number, max_noise: number, steps: number, standard: string, seed: number): Float64Array;

/**
 * Largest relative deviation between the lattice coordinates of the scaled
 * scene and `lambda` times those of the original.
 */
export function scale_check(width: number, height: number, lambda: number, lattice_dim: number): number;

/**
 * Back-projected points of the synthetic street scene with depths scaled by
 * `lambda`, as flat `x y z` triples.
 */
export function scene_points(width: number, height: number, lambda: number): Float32Array;

/**
 * RGBA bytes of the synthetic test image.
 */
export function synth_image(width: number, height: number, noise: number, seed: number): Uint8Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly filter_rgba: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number) => [number, number, number, number];
    readonly metrics_curve: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly scale_check: (a: number, b: number, c: number, d: number) => [number, number, number];
    readonly scene_points: (a: number, b: number, c: number) => [number, number, number, number];
    readonly synth_image: (a: number, b: number, c: number, d: number) => [number, number];
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
