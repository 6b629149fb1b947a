/** Integer <-> float conversion rules, mirroring the core library exactly:
 * color = value / maxint (round-half-up on encode, [0, 1] only),
 * label8 carries integers unchanged, depth16 scales by meters-per-unit with
 * 65535 as the invalid sentinel (NaN in float form). */

import { TangentImageError } from "./errors.js";

export type ChannelKind = "color8" | "color16" | "label8" | "depth16";

export interface Semantics {
    kind: ChannelKind;
    depthScale?: number; // depth16 only, default 1/512
    invalidValue?: number; // depth16 only, default 65535
}

export function bitDepth(kind: ChannelKind): 8 | 16 {
    return kind === "color8" || kind === "label8" ? 8 : 16;
}

export function maxInt(kind: ChannelKind): number {
    return bitDepth(kind) === 8 ? 255 : 65535;
}

const roundHalfUp = (x: number) => Math.floor(x + 0.5);

export function decodeSamples(
    raw: Uint8Array | Uint16Array,
    semantics: Semantics,
): Float32Array {
    const out = new Float32Array(raw.length);
    const kind = semantics.kind;
    if (kind === "color8" || kind === "color16") {
        const scale = 1 / maxInt(kind);
        for (let i = 0; i < raw.length; i++) out[i] = raw[i] * scale;
    } else if (kind === "label8") {
        for (let i = 0; i < raw.length; i++) out[i] = raw[i];
    } else {
        const scale = semantics.depthScale ?? 1 / 512;
        const invalid = semantics.invalidValue ?? 65535;
        for (let i = 0; i < raw.length; i++) {
            out[i] = raw[i] === invalid ? NaN : raw[i] * scale;
        }
    }
    return out;
}

export function encodeSamples(
    samples: Float32Array,
    semantics: Semantics,
): Uint8Array | Uint16Array {
    const kind = semantics.kind;
    const out = bitDepth(kind) === 8
        ? new Uint8Array(samples.length)
        : new Uint16Array(samples.length);
    if (kind === "color8" || kind === "color16") {
        const top = maxInt(kind);
        for (let i = 0; i < samples.length; i++) {
            const v = samples[i];
            if (!Number.isFinite(v) || v < -1e-12 || v > 1 + 1e-12) {
                throw new TangentImageError(
                    "range.encode",
                    `color sample ${v} outside [0, 1]`,
                );
            }
            out[i] = roundHalfUp(Math.min(Math.max(v, 0), 1) * top);
        }
    } else if (kind === "label8") {
        for (let i = 0; i < samples.length; i++) {
            const v = samples[i];
            const q = roundHalfUp(v);
            if (!Number.isFinite(v) || Math.abs(q - v) > 1e-9 || q < 0 || q > 255) {
                throw new TangentImageError(
                    "range.encode",
                    `label sample ${v} is not an integer in [0, 255]`,
                );
            }
            out[i] = q;
        }
    } else {
        const scale = semantics.depthScale ?? 1 / 512;
        const invalid = semantics.invalidValue ?? 65535;
        for (let i = 0; i < samples.length; i++) {
            const v = samples[i];
            if (!Number.isFinite(v)) {
                out[i] = invalid;
                continue;
            }
            const q = roundHalfUp(v / scale);
            if (q < 0 || q >= invalid) {
                throw new TangentImageError(
                    "range.encode",
                    `depth sample ${v} outside the encodable range`,
                );
            }
            out[i] = q;
        }
    }
    return out;
}
