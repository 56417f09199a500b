/** Error taxonomy mirroring the consuming core's categories. */

export class SchemaError extends Error {
  constructor(message: string) {
    super(message);
    this.name = 'SchemaError';
  }
}

export class TooShortError extends Error {
  constructor(message: string) {
    super(message);
    this.name = 'TooShortError';
  }
}

export class ModelUnavailableError extends Error {
  constructor(message: string) {
    super(message);
    this.name = 'ModelUnavailableError';
  }
}
