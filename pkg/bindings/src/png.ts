/** Thin wrapper over fast-png for the raster shapes this package moves:
 * 8- or 16-bit, 1 or 3 channels, row-major. */

import { decode, encode } from "fast-png";
import { TangentImageError } from "./errors.js";

export interface RawImage {
    data: Uint8Array | Uint16Array;
    height: number;
    width: number;
    channels: number;
    depth: 8 | 16;
}

export function decodePng(buffer: Uint8Array): RawImage {
    let img;
    try {
        img = decode(buffer);
    } catch (err) {
        throw new TangentImageError("io.read", `could not decode PNG: ${err}`);
    }
    const channels = img.channels;
    if (channels !== 1 && channels !== 3) {
        throw new TangentImageError(
            "format.bit-depth",
            `unsupported channel count ${channels}`,
        );
    }
    const depth = img.depth === 16 ? 16 : 8;
    const data = depth === 16
        ? (img.data instanceof Uint16Array ? img.data : new Uint16Array(img.data))
        : (img.data instanceof Uint8Array ? img.data : new Uint8Array(img.data));
    return { data, height: img.height, width: img.width, channels, depth };
}

export function encodePng(img: RawImage): Uint8Array {
    return encode({
        width: img.width,
        height: img.height,
        data: img.data,
        depth: img.depth,
        channels: img.channels,
    });
}
