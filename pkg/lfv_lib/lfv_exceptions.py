# Copyright (c) 2024, lfv contributors
# All rights reserved. See LICENSE for the terms.
"""Exception classes for lfv"""
import collections.abc


class ExceptionWithMsg(Exception):
    """message attribute will be an iterable if a message is supplied"""
    def __init__(self, message):
        if not isinstance(message, str) and not isinstance(
            message,
            collections.abc.Iterable
        ):
            message = [message]

        self.message = message
        super().__init__(message)

    def __str__(self):
        if isinstance(self.message, str):
            return self.message

        return '\n'.join(str(m) for m in self.message)


class LFVError(ExceptionWithMsg):
    exit_code = 1


class ArgumentError(LFVError, ValueError):
    exit_code = 2


class ConfigError(LFVError):
    exit_code = 2


class UnsupportedMeasure(LFVError):
    exit_code = 2


class ResourceLimit(LFVError):
    exit_code = 2


class NumericError(LFVError):
    exit_code = 3

    def __init__(self, message, achieved=None):
        self.achieved = achieved
        super().__init__(message)


class DegenerateMeasure(NumericError):
    pass


class AbsorbingState(LFVError):
    exit_code = 3


class InvariantFailed(LFVError):
    exit_code = 4
