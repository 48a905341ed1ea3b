"""Exception hierarchy shared by all kernels and the CLI."""


class DemError(Exception):
    """Base class for every error raised by demforge."""


class ConfigError(DemError):
    """Invalid or unparsable configuration.

    ``key`` names the offending key when known, ``line`` the 1-based line.
    """

    def __init__(self, message, key=None, line=None):
        self.key = key
        self.line = line
        prefix = []
        if line is not None:
            prefix.append(f"line {line}")
        if key is not None:
            prefix.append(f"key {key!r}")
        if prefix:
            message = f"{', '.join(prefix)}: {message}"
        super().__init__(message)


class DegenerateContactError(DemError):
    """Two centers coincide, so the contact normal is undefined."""


class ContactCapacityError(DemError):
    """A particle needs more contact slots than the table provides."""

    def __init__(self, particle, capacity):
        self.particle = particle
        self.capacity = capacity
        super().__init__(
            f"particle {particle} exceeds contact capacity K={capacity}"
        )


class KernelError(DemError):
    """A pipeline kernel aborted the step."""

    def __init__(self, kernel, particle, reason, step=None):
        self.kernel = kernel
        self.particle = particle
        self.reason = reason
        self.step = step
        where = f"step {step}, " if step is not None else ""
        super().__init__(f"{where}kernel {kernel}: particle {particle}: {reason}")
