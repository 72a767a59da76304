/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const matroidEpochs: (a: number, b: number, c: number, d: number, e: number) => [number, number];
export const packingTrace: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number];
export const softmaxCurve: (a: number, b: number, c: number, d: number) => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
