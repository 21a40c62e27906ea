/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const gap_spectrum: (a: number, b: number, c: number) => [number, number, number, number];
export const scattering_sweep: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
export const soliton_profile: (a: number, b: number, c: number) => [number, number, number, number];
export const version: () => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
