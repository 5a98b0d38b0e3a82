from dataclasses import dataclass


def id_width(max_id):
    """Bits for a NodeId field; value 0 encodes NONE."""
    return max(max_id, 1).bit_length()


def counter_width(n):
    return max(n, 1).bit_length()


def gamma_length(value):
    if value < 1:
        raise ValueError(f"Elias gamma needs a positive integer, got {value}")
    return 2 * value.bit_length() - 1


@dataclass(frozen=True)
class Widths:
    """Field widths of one network: identifiers, counters and milestone indices (s)."""

    node_id: int
    counter: int
    weight_index: int

    @classmethod
    def for_network(cls, g, ms):
        from ssmst.lib.milestones import code_length

        return cls(
            node_id=id_width(g.max_id),
            counter=counter_width(g.n),
            weight_index=max(code_length(ms), 1),
        )


class BitWriter:
    def __init__(self):
        self.bits = []

    def write(self, value, width):
        if width < 0 or value < 0 or value >> width:
            raise ValueError(f"value {value} does not fit in {width} bits")
        for shift in range(width - 1, -1, -1):
            self.bits.append((value >> shift) & 1)

    def write_flag(self, flag):
        self.bits.append(1 if flag else 0)

    def write_gamma(self, value):
        length = value.bit_length()
        self.bits.extend([0] * (length - 1))
        self.write(value, length)

    def __len__(self):
        return len(self.bits)

    def to_string(self):
        return "".join(str(b) for b in self.bits)


class BitReader:
    def __init__(self, bits):
        self.bits = [int(b) for b in bits]
        self.pos = 0

    def read(self, width):
        if self.pos + width > len(self.bits):
            raise ValueError("read past the end of the bit string")
        value = 0
        for _ in range(width):
            value = (value << 1) | self.bits[self.pos]
            self.pos += 1
        return value

    def read_gamma(self):
        zeros = 0
        while self.pos < len(self.bits) and self.bits[self.pos] == 0:
            zeros += 1
            self.pos += 1
        return self.read(zeros + 1)
