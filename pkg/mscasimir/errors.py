from __future__ import annotations


class MscasimirError(RuntimeError):
    pass


class SignatureError(MscasimirError):
    pass


class ValidationError(MscasimirError):
    pass


class ComputationError(MscasimirError):
    pass


class ConfigError(MscasimirError):
    pass
