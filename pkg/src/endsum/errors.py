"""Exception hierarchy shared by every module of the package."""


class EndSumError(Exception):
    """Base class for all errors raised by endsum."""


class InvalidLabel(EndSumError):
    """A genus-zero end was declared non-orientable."""


class InvalidExpression(EndSumError):
    """An end-space expression violates a structural invariant."""


class AddressError(EndSumError):
    """An end address does not name a single addressable end."""


class UnknownEnd(AddressError):
    pass


class Unaddressable(AddressError):
    """The address descends into a Cantor block."""


class SameEnd(EndSumError):
    """Both feet of the 1-handle were put on one end.

    The uniqueness result needs two *distinct* ends; with a single end the
    outcome depends on the chosen rays, so the request is refused.
    """

    def __init__(self, message=None):
        super().__init__(
            message
            or "the 1-handle must join two distinct ends "
            "(distinct-ends hypothesis: with one end the result is not unique)"
        )


class DescriptorError(EndSumError):
    """Base class for descriptor validation failures."""


class OddOrientableGenus(DescriptorError):
    pass


class NonorientableSphere(DescriptorError):
    """A non-orientable piece needs at least one cross-cap."""


class NegativeValue(DescriptorError):
    pass


class CircleMismatch(DescriptorError):
    pass


class DanglingNode(DescriptorError):
    pass


class DuplicateName(DescriptorError):
    pass


class EmptyDescriptor(DescriptorError):
    pass


class NegativeGenus(EndSumError):
    pass


class Unsupported(EndSumError):
    """The automaton shape lies outside the class with a closed-form end space."""


class NonlinearEnd(EndSumError):
    """The combinatorial construction needs both ends presented by chains."""
