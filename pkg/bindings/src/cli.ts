/** Subprocess plumbing: every binding call delegates to the installed
 * `tangent-images` executable and surfaces its structured errors. */

import { spawnSync } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { TangentImageError } from "./errors.js";

export function cliExecutable(): string {
    return process.env.TANGENT_IMAGES_CLI ?? "tangent-images";
}

export function runCli(args: string[]): string {
    const result = spawnSync(cliExecutable(), args, {
        encoding: "utf8",
        maxBuffer: 1 << 28,
    });
    if (result.error) {
        throw new TangentImageError(
            "io.read",
            `failed to launch ${cliExecutable()}: ${result.error.message}`,
        );
    }
    if (result.status !== 0) {
        const line = (result.stderr ?? "").trim().split("\n").pop() ?? "";
        try {
            const payload = JSON.parse(line);
            throw new TangentImageError(payload.code, payload.message);
        } catch (err) {
            if (err instanceof TangentImageError) throw err;
            throw new TangentImageError(
                "error",
                `CLI exited with status ${result.status}: ${result.stderr}`,
            );
        }
    }
    return result.stdout;
}

export function withTempDir<T>(fn: (dir: string) => T): T {
    const dir = mkdtempSync(join(tmpdir(), "tangent-"));
    try {
        return fn(dir);
    } finally {
        rmSync(dir, { recursive: true, force: true });
    }
}
