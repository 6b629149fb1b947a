/** Array-in / array-out access to the tangent-image pipeline for Node data
 * loaders. No algorithm logic lives here: shapes are validated, arrays are
 * marshalled through the documented PNG + JSON formats, and the installed
 * `tangent-images` CLI does all computation. */

import { mkdirSync, readFileSync, writeFileSync } from "node:fs";
import { join } from "node:path";
import { runCli, withTempDir } from "./cli.js";
import { TangentImageError, invalidArgument } from "./errors.js";
import { decodePng, encodePng } from "./png.js";
import {
    ChannelKind,
    Semantics,
    bitDepth,
    decodeSamples,
    encodeSamples,
} from "./semantics.js";

export { TangentImageError } from "./errors.js";
export type { ChannelKind, Semantics } from "./semantics.js";

export type Interp = "bilinear" | "nearest";

/** Row-major (height, width, channels) float32 panorama or crop. */
export interface ArrayImage {
    data: Float32Array;
    height: number;
    width: number;
    channels: number;
}

export interface PlaneSpec {
    centerLatDeg: number;
    centerLonDeg: number;
    halfExtent: number;
}

/** Row-major (count, dim, dim, channels) float32 tangent-image stack. */
export interface TangentSet {
    images: Float32Array;
    count: number;
    dim: number;
    channels: number;
    baseLevel: number;
    sourceLevel: number;
    interp: Interp;
    specs: PlaneSpec[];
}

export interface Intrinsics {
    fx: number;
    fy: number;
    cx: number;
    cy: number;
    width: number;
    height: number;
}

function checkImage(img: ArrayImage, name: string): void {
    const { data, height, width, channels } = img;
    if (height < 1 || width < 1 || channels < 1) {
        throw invalidArgument(`${name}: bad shape ${height}x${width}x${channels}`);
    }
    if (data.length !== height * width * channels) {
        throw invalidArgument(
            `${name}: data length ${data.length} != ` +
                `${height}x${width}x${channels}`,
        );
    }
}

function checkEquirect(img: ArrayImage): void {
    checkImage(img, "panorama");
    if (img.width !== 2 * img.height) {
        throw new TangentImageError(
            "format.aspect",
            `panorama must be 2:1, got ${img.height}x${img.width}`,
        );
    }
}

function writeImagePng(
    path: string,
    img: ArrayImage,
    semantics: Semantics,
): void {
    writeFileSync(
        path,
        encodePng({
            data: encodeSamples(img.data, semantics),
            height: img.height,
            width: img.width,
            channels: img.channels,
            depth: bitDepth(semantics.kind),
        }),
    );
}

function readImagePng(path: string, semantics: Semantics): ArrayImage {
    const raw = decodePng(readFileSync(path));
    if (raw.depth !== bitDepth(semantics.kind)) {
        throw new TangentImageError(
            "format.bit-depth",
            `${path}: stored depth ${raw.depth} does not match ${semantics.kind}`,
        );
    }
    return {
        data: decodeSamples(raw.data, semantics),
        height: raw.height,
        width: raw.width,
        channels: raw.channels,
    };
}

interface MetaFace {
    center_lat_deg: number;
    center_lon_deg: number;
    half_extent: number;
}

interface TangentMeta {
    base_level: number;
    source_level: number;
    dim: number;
    interp: Interp;
    channel_semantics: { kind: ChannelKind; depth_scale?: number };
    faces: MetaFace[];
}

function readTangentDir(dir: string, semantics: Semantics): TangentSet {
    const meta: TangentMeta = JSON.parse(
        readFileSync(join(dir, "meta.json"), "utf8"),
    );
    const count = meta.faces.length;
    const dim = meta.dim;
    let images: Float32Array | null = null;
    let channels = 0;
    for (let k = 0; k < count; k++) {
        const name = `face_${String(k).padStart(5, "0")}.png`;
        const face = readImagePng(join(dir, name), semantics);
        if (images === null) {
            channels = face.channels;
            images = new Float32Array(count * dim * dim * channels);
        }
        images.set(face.data, k * dim * dim * channels);
    }
    return {
        images: images ?? new Float32Array(0),
        count,
        dim,
        channels,
        baseLevel: meta.base_level,
        sourceLevel: meta.source_level,
        interp: meta.interp,
        specs: meta.faces.map((f) => ({
            centerLatDeg: f.center_lat_deg,
            centerLonDeg: f.center_lon_deg,
            halfExtent: f.half_extent,
        })),
    };
}

function writeTangentDir(dir: string, set: TangentSet, semantics: Semantics): void {
    const { count, dim, channels } = set;
    for (let k = 0; k < count; k++) {
        const face = set.images.subarray(
            k * dim * dim * channels,
            (k + 1) * dim * dim * channels,
        );
        writeImagePng(
            join(dir, `face_${String(k).padStart(5, "0")}.png`),
            { data: new Float32Array(face), height: dim, width: dim, channels },
            semantics,
        );
    }
    const meta: TangentMeta = {
        base_level: set.baseLevel,
        source_level: set.sourceLevel,
        dim,
        interp: set.interp,
        channel_semantics: { kind: semantics.kind },
        faces: set.specs.map((s) => ({
            center_lat_deg: s.centerLatDeg,
            center_lon_deg: s.centerLonDeg,
            half_extent: s.halfExtent,
        })),
    };
    writeFileSync(join(dir, "meta.json"), JSON.stringify(meta));
}

export interface ToTangentOptions {
    interp?: Interp;
    channels?: ChannelKind;
    threads?: number;
}

/** Render a 2:1 panorama to its tangent-image stack. */
export function toTangent(
    img: ArrayImage,
    baseLevel: number,
    options: ToTangentOptions = {},
): TangentSet {
    checkEquirect(img);
    const semantics: Semantics = { kind: options.channels ?? "color8" };
    return withTempDir((dir) => {
        const input = join(dir, "input.png");
        const outDir = join(dir, "tset");
        writeImagePng(input, img, semantics);
        const args = [
            "to-tangent",
            "--input", input,
            "--base-level", String(baseLevel),
            "--out", outDir,
        ];
        if (options.interp) args.push("--interp", options.interp);
        if (options.channels) args.push("--channels", options.channels);
        if (options.threads) args.push("--threads", String(options.threads));
        runCli(args);
        return readTangentDir(outDir, semantics);
    });
}

export interface FromTangentOptions {
    channels?: ChannelKind;
    threads?: number;
}

/** Render a tangent-image stack back to a 2:1 panorama. */
export function fromTangent(
    set: TangentSet,
    outHeight: number,
    options: FromTangentOptions = {},
): ArrayImage {
    if (set.count !== set.specs.length) {
        throw invalidArgument(
            `${set.count} images but ${set.specs.length} specs`,
        );
    }
    const semantics: Semantics = { kind: options.channels ?? "color8" };
    return withTempDir((dir) => {
        const inDir = join(dir, "tset");
        const out = join(dir, "back.png");
        mkdirSync(inDir, { recursive: true });
        writeTangentDir(inDir, set, semantics);
        const args = [
            "from-tangent",
            "--in", inDir,
            "--height", String(outHeight),
            "--out", out,
        ];
        if (options.threads) args.push("--threads", String(options.threads));
        runCli(args);
        return readImagePng(out, semantics);
    });
}

/** Tangent-plane geometry for a base/source level pair. */
export function makePlaneSpecs(
    baseLevel: number,
    sourceLevel: number,
): { dim: number; faces: PlaneSpec[] } {
    const out = JSON.parse(
        runCli([
            "icosphere", "plane-specs",
            "--base-level", String(baseLevel),
            "--source-level", String(sourceLevel),
        ]),
    );
    return {
        dim: out.dim,
        faces: out.faces.map((f: MetaFace) => ({
            centerLatDeg: f.center_lat_deg,
            centerLonDeg: f.center_lon_deg,
            halfExtent: f.half_extent,
        })),
    };
}

export interface NormalizeOptions {
    level: number;
    fovDeg: number;
    seed?: number;
    interp?: Interp;
    channels?: ChannelKind;
}

export interface NormalizedCamera {
    image: ArrayImage;
    intrinsics: Intrinsics;
    alpha: number;
    shift: [number, number];
}

/** Resample a perspective image to a spherical-level angular resolution. */
export function normalizeCamera(
    img: ArrayImage,
    intrinsics: Intrinsics,
    options: NormalizeOptions,
): NormalizedCamera {
    checkImage(img, "image");
    if (img.height !== intrinsics.height || img.width !== intrinsics.width) {
        throw invalidArgument(
            `image is ${img.height}x${img.width} but intrinsics say ` +
                `${intrinsics.height}x${intrinsics.width}`,
        );
    }
    const semantics: Semantics = { kind: options.channels ?? "color8" };
    return withTempDir((dir) => {
        const src = join(dir, "src.png");
        const intr = join(dir, "intr.json");
        const out = join(dir, "out.png");
        const outMeta = join(dir, "out.json");
        writeImagePng(src, img, semantics);
        writeFileSync(intr, JSON.stringify(intrinsics));
        const args = [
            "camnorm",
            "--level", String(options.level),
            "--fov-deg", String(options.fovDeg),
            "--intrinsics", intr,
            "--image", src,
            "--out", out,
            "--out-meta", outMeta,
        ];
        if (options.seed !== undefined) args.push("--seed", String(options.seed));
        if (options.interp) args.push("--interp", options.interp);
        runCli(args);
        const meta = JSON.parse(readFileSync(outMeta, "utf8"));
        return {
            image: readImagePng(out, semantics),
            intrinsics: {
                fx: meta.fx, fy: meta.fy, cx: meta.cx, cy: meta.cy,
                width: meta.width, height: meta.height,
            },
            alpha: meta.alpha,
            shift: [meta.shift[0], meta.shift[1]],
        };
    });
}
