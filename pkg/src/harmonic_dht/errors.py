"""Exception types shared across modules."""


class DuplicateKeyError(KeyError):
    pass


class UnknownKeyError(KeyError):
    pass


class CapacityError(ValueError):
    pass


class UnderflowError(ValueError):
    pass


class InvariantError(AssertionError):
    pass
