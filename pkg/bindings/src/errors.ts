/** Error with the same stable `code` strings the CLI emits on stderr. */
export class TangentImageError extends Error {
    readonly code: string;

    constructor(code: string, message: string) {
        super(message);
        this.name = "TangentImageError";
        this.code = code;
    }
}

export function invalidArgument(message: string): TangentImageError {
    return new TangentImageError("invalid-argument", message);
}
