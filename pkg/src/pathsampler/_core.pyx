# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled sampler kernels.

A line-for-line port of the Python samplers onto a flat char buffer.  The
kernel pulls raw 64-bit words from the same numpy bit generator as
:class:`pathsampler.randomness.BitSource`, consumes them in the same order and
adds the same entropy charges in the same order, so outputs and meters are
identical to the pure-Python backend.
"""

from cpython.pycapsule cimport PyCapsule_GetPointer
from libc.math cimport log2
from libc.stdint cimport uint64_t
from libc.stdlib cimport free, malloc, realloc
from numpy.random cimport bitgen_t

cimport cython

from .exact import R, digit_table
from .paths import Model, Path
from .randomness import (
    LOG2_3,
    SCHROEDER_STEP_ENTROPY,
    bernoulli_entropy,
    categorical_plan,
    colored_step_entropy,
)
from .schroeder import EXTEND_ATOMS, branch_probability, slot_probability

DEF TABLE_BITS = 4096
DEF PLAN_BITS = 64  # short tables for per-length probabilities; a longer one is fetched on a tie

cdef enum:
    OK = 0
    REJ = 1

cdef enum ModelCode:
    M_MOTZKIN = 0
    M_COLORED = 1
    M_SCHROEDER = 2
    M_DYCK = 3

cdef char SU = b'U'
cdef char SF = b'F'
cdef char SD = b'D'
cdef char SC = b'C'

_MODEL_OF = {M_MOTZKIN: Model.MOTZKIN, M_COLORED: Model.COLORED,
             M_SCHROEDER: Model.SCHROEDER, M_DYCK: Model.DYCK}
_CODE_MODEL = {1: M_MOTZKIN, 2: M_MOTZKIN, 3: M_COLORED, 4: M_COLORED, 5: M_SCHROEDER,
               6: M_SCHROEDER, 7: M_SCHROEDER, 8: M_SCHROEDER, 9: M_SCHROEDER,
               10: M_MOTZKIN, 11: M_SCHROEDER, 12: M_DYCK}

# digit tables of the constant boundaries; every boundary used here is irrational
_R_DIGITS = digit_table(R, TABLE_BITS)
_ONE_MINUS_R_DIGITS = digit_table(1 - R, TABLE_BITS)
_TWO_R_DIGITS = digit_table(2 * R, TABLE_BITS)
_EXTEND_ENTROPY = categorical_plan(EXTEND_ATOMS)[1]
_BERNOULLI_PLANS = {}


def _plan(kind, int m, int bits=PLAN_BITS):
    key = (kind, m, bits)
    plan = _BERNOULLI_PLANS.get(key)
    if plan is None:
        p = slot_probability(m) if kind == "slot" else branch_probability(m)
        plan = _BERNOULLI_PLANS[key] = (digit_table(p, bits), bernoulli_entropy(p), kind, m)
    return plan


cdef inline int H(char s) noexcept nogil:
    if s == SU:
        return 1
    if s == SD:
        return -1
    return 0


@cython.final
cdef class Kernel:
    cdef bitgen_t* rng
    cdef uint64_t word
    cdef int nleft
    cdef double ent
    cdef long long phys
    cdef char* s
    cdef Py_ssize_t length, cap
    cdef long h, flats
    cdef Py_ssize_t ffz
    cdef long long reads, writes, restarts, wasted
    cdef int model
    cdef long long cp, cq
    cdef double col_h
    cdef Py_ssize_t* entry
    cdef Py_ssize_t entry_cap
    cdef const unsigned char* r_tab
    cdef const unsigned char* omr_tab
    cdef const unsigned char* tr_tab
    cdef object keep

    def __cinit__(self):
        self.s = NULL
        self.entry = NULL

    def __dealloc__(self):
        free(self.s)
        free(self.entry)

    cdef int setup(self, int model, Py_ssize_t cap, object c) except -1:
        self.model = model
        self.cap = cap + 8
        self.s = <char*> malloc(self.cap)
        self.entry_cap = cap + 8
        self.entry = <Py_ssize_t*> malloc(self.entry_cap * sizeof(Py_ssize_t))
        if self.s == NULL or self.entry == NULL:
            raise MemoryError()
        self.length = 0
        self.h = self.flats = 0
        self.ffz = -1
        self.reads = self.writes = self.restarts = self.wasted = 0
        if c is not None:
            self.cp = c.numerator
            self.cq = c.denominator
            self.col_h = colored_step_entropy(c)
        self.keep = (_R_DIGITS, _ONE_MINUS_R_DIGITS, _TWO_R_DIGITS)
        self.r_tab = <const unsigned char*> _R_DIGITS
        self.omr_tab = <const unsigned char*> _ONE_MINUS_R_DIGITS
        self.tr_tab = <const unsigned char*> _TWO_R_DIGITS
        return 0

    # -- bits and primitives ------------------------------------------------------

    cdef inline int bit(self) noexcept nogil:
        if self.nleft == 0:
            self.word = self.rng.next_uint64(self.rng.state)
            self.nleft = 64
        self.nleft -= 1
        self.phys += 1
        return <int> ((self.word >> self.nleft) & 1)

    cdef uint64_t dice(self, uint64_t m) noexcept nogil:
        cdef uint64_t v = 1, c = 0
        if m == 1:
            return 0
        while True:
            v <<= 1
            c = (c << 1) | <uint64_t> self.bit()
            if v >= m:
                if c < m:
                    return c
                v -= m
                c -= m

    cdef uint64_t uniform_int(self, uint64_t m) noexcept nogil:
        if m > 1:
            self.ent += log2(<double> m)
        return self.dice(m)

    cdef int interval2(self, const unsigned char* a, const unsigned char* b) except -1:
        cdef Py_ssize_t k = 0
        cdef int u, above = 0
        cdef bint ta = True, tb = True
        while ta or tb:
            if k >= TABLE_BITS:
                raise RuntimeError("boundary comparison ran past the digit table")
            u = self.bit()
            if ta and u != a[k]:
                ta = False
                above += u > a[k]
            if tb and u != b[k]:
                tb = False
                above += u > b[k]
            k += 1
        return above

    cdef int bernoulli_plan(self, tuple plan) except -1:
        cdef bytes digits = plan[0]
        cdef const unsigned char* a = digits
        cdef Py_ssize_t k = 0, size = len(digits)
        cdef int u
        self.ent += <double> plan[1]
        while True:
            if k == size:
                if size >= TABLE_BITS:
                    raise RuntimeError("boundary comparison ran past the digit table")
                digits = _plan(plan[2], plan[3], TABLE_BITS)[0]
                a = digits
                size = len(digits)
            u = self.bit()
            if u != a[k]:
                return u < a[k]
            k += 1

    cdef char draw(self) except 0:
        cdef uint64_t j
        if self.model == M_MOTZKIN:
            self.ent += LOG2_3_C
            return b"UFD"[self.dice(3)]
        if self.model == M_SCHROEDER:
            self.ent += SCHROEDER_H_C
            return b"UFD"[self.interval2(self.r_tab, self.omr_tab)]
        if self.model == M_COLORED:
            self.ent += self.col_h
            j = self.dice(<uint64_t> (3 * self.cq + self.cp))
            if j < <uint64_t> (3 * self.cq):
                return b"UFD"[j // <uint64_t> self.cq]
            return SC
        self.ent += 1.0
        return SU if self.bit() else SD

    # -- buffer operations ------------------------------------------------------------

    cdef int grow(self) except -1:
        cdef Py_ssize_t cap = self.cap * 2
        cdef char* t = <char*> realloc(self.s, cap)
        if t == NULL:
            raise MemoryError()
        self.s = t
        self.cap = cap
        return 0

    cdef int push(self, char c) except -1:
        if self.length == self.cap:
            self.grow()
        if c == SF and self.h == 0 and self.ffz < 0 and self.model == M_SCHROEDER:
            self.ffz = self.length
        self.s[self.length] = c
        self.length += 1
        self.h += H(c)
        if c == SF:
            self.flats += 1
        self.writes += 1
        return 0

    cdef inline Py_ssize_t geo_len(self) noexcept nogil:
        if self.model == M_SCHROEDER:
            return self.length + self.flats
        return self.length

    cdef void truncate(self) noexcept nogil:
        self.length -= 1
        cdef char c = self.s[self.length]
        self.h -= H(c)
        if c == SF:
            self.flats -= 1
        if self.ffz >= self.length:
            self.ffz = -1

    cdef void replace_last(self, char c) noexcept nogil:
        cdef Py_ssize_t last = self.length - 1
        cdef char old = self.s[last]
        self.s[last] = c
        self.writes += 1
        self.h += H(c) - H(old)
        self.flats += (c == SF) - (old == SF)
        if self.model == M_SCHROEDER:
            if self.ffz == last and c != SF:
                self.ffz = -1
            elif c == SF and self.ffz < 0 and self.h == 0:
                self.ffz = last

    cdef void unfold_at(self, Py_ssize_t j) noexcept nogil:
        cdef char* st = self.s
        cdef Py_ssize_t n = self.length, t
        cdef char prev = SU, c
        cdef long rel = 0, low = 0, dh = 0
        for t in range(j, n):
            c = st[t]
            st[t] = prev
            dh += H(prev) - H(c)
            if c == SD:
                rel -= 1
                if rel < low:
                    low = rel
                    prev = SU
                    continue
            else:
                rel += H(c)
            prev = c
        self.h += dh
        self.writes += n - j
        if self.ffz >= j:
            self.ffz = -1

    cdef int unfold_flat_from_right(self, Py_ssize_t i) except -1:
        cdef char* st = self.s
        cdef Py_ssize_t n = self.length, p = n - 1, seen = 0, level
        cdef long h = self.h, k
        cdef char c
        if self.entry_cap < n + 2:
            free(self.entry)
            self.entry_cap = 2 * n + 2
            self.entry = <Py_ssize_t*> malloc(self.entry_cap * sizeof(Py_ssize_t))
            if self.entry == NULL:
                raise MemoryError()
        while True:
            c = st[p]
            if c == SF:
                seen += 1
                if seen == i:
                    break
            elif c == SD and h >= 0:
                self.entry[h] = p
            h -= H(c)
            p -= 1
        k = h
        st[p] = SU
        for level in range(k):
            st[self.entry[level]] = SU
        self.length -= 1
        self.writes += 1 + k
        self.reads += (n - p) - 1 - k
        self.flats -= 1
        self.h = 2 * k + 1
        if self.ffz >= p:
            self.ffz = -1
        return 0

    cdef Py_ssize_t fold_excursion(self, bint flat) except -1:
        cdef char* st = self.s
        cdef Py_ssize_t n = self.length, p = n - 1, zero_flat = -1
        cdef long h = self.h, k, low, hb, out_h = 0
        cdef char c, conv, new, carry = 0
        cdef bint lead
        if h < 1 or h % 2 == 0:
            raise ValueError("fold needs a positive path of odd height")
        k = (h - 1) // 2
        low = h
        while True:
            if p < 0:
                raise ValueError("fold needs a positive path")
            c = st[p]
            hb = h - H(c)
            lead = False
            if c == SU and hb < low:
                low = hb
                lead = hb == k
                conv = SF if (lead and flat) else SD
            else:
                conv = c
            if flat:
                if conv != c:
                    st[p] = conv
                    self.writes += 1
                else:
                    self.reads += 1
                new = conv
            else:
                new = carry
                if carry != 0:
                    st[p] = carry
                    self.writes += 1
                else:
                    self.reads += 1
            if new != 0:
                if new == SF and out_h == 0:
                    zero_flat = p
                out_h -= H(new)
            if lead:
                break
            carry = conv
            h = hb
            p -= 1
        if flat:
            self.flats += 1
        else:
            self.length -= 1
        self.h = 0
        if self.model == M_SCHROEDER and not (self.ffz >= 0 and self.ffz < p):
            self.ffz = zero_flat
        return p

    cdef inline Py_ssize_t scan_flippable(self) noexcept nogil:
        cdef Py_ssize_t p = self.length - 1
        if self.model == M_COLORED:
            while p >= 0 and (self.s[p] == SD or self.s[p] == SC):
                p -= 1
        else:
            while p >= 0 and self.s[p] == SD:
                p -= 1
        return p

    cdef void flip_at(self, Py_ssize_t p) noexcept nogil:
        if self.s[p] == SU:
            self.s[p] = SF
            self.h -= 1
            self.flats += 1
        else:
            self.s[p] = SU
            self.h += 1
            self.flats -= 1
        self.writes += 1

    cdef bint flip(self) noexcept nogil:
        cdef Py_ssize_t p = self.scan_flippable()
        self.reads += self.length - 1 - p
        if p < 0:
            return False
        self.flip_at(p)
        return True

    cdef void lift(self) noexcept nogil:
        self.s[self.ffz] = SU
        self.writes += 1
        self.h += 1
        self.flats -= 1
        self.ffz = -1

    cdef int place_before_run(self, Py_ssize_t j, char c) except -1:
        cdef Py_ssize_t pos
        if j == 0:
            return self.push(c)
        if self.length == self.cap:
            self.grow()
        pos = self.length - j
        self.s[pos] = c
        self.s[self.length] = SF
        self.length += 1
        self.writes += 2
        self.h += H(c)
        if self.model == M_SCHROEDER and not (self.ffz >= 0 and self.ffz < pos):
            self.ffz = pos + 1 if self.h == 0 else -1
        return 0

    cdef void flatten_at(self, Py_ssize_t pos) noexcept nogil:
        cdef char old = self.s[pos]
        self.s[pos] = SF
        self.writes += 1
        self.h -= H(old)
        self.flats += 1
        if self.model == M_SCHROEDER and not (self.ffz >= 0 and self.ffz < pos):
            self.ffz = pos if self.h == 0 else -1

    cdef void collapse_dd(self) noexcept nogil:
        self.s[self.length - 2] = SF
        self.length -= 1
        self.writes += 1
        self.h += 2
        self.flats += 1

    # -- Motzkin --------------------------------------------------------------------

    cdef int recover_plain(self) except -1:
        cdef Py_ssize_t n = self.length
        cdef Py_ssize_t j = <Py_ssize_t> self.uniform_int(<uint64_t> (2 * n + 1))
        if j < n:
            self.unfold_at(j)
        elif j < 2 * n:
            self.unfold_at(j - n)
            self.flip()
        elif not self.flip() or self.h < 0:
            return REJ
        return OK

    cdef int recover_colored(self) except -1:
        cdef long long n = self.length, p = self.cp, q = self.cq
        cdef long long j = <long long> self.uniform_int(<uint64_t> (2 * n * q + (p if p > q else q)))
        cdef Py_ssize_t pos
        if j < 2 * n * q:
            j //= q
            if j < n:
                self.unfold_at(j)
            else:
                self.unfold_at(j - n)
                self.flip()
            return OK
        j -= 2 * n * q
        pos = self.scan_flippable()
        self.reads += self.length - 1 - pos
        if pos >= 0 and self.s[pos] == SF:
            if j >= q:
                self.reads += 1
                return REJ
            self.flip_at(pos)
            return OK
        self.reads += pos >= 0
        if j >= p:
            return REJ
        self.replace_last(SC)
        return OK

    cdef int motzkin_positive(self, Py_ssize_t n) except -1:
        cdef int r
        while self.length < n:
            self.push(self.draw())
            if self.h == -1:
                r = self.recover_colored() if self.model == M_COLORED else self.recover_plain()
                if r:
                    return r
        return OK

    cdef int motzkin_excursion(self, Py_ssize_t n) except -1:
        cdef int r = self.motzkin_positive(n + 1)
        if r:
            return r
        if self.h % 2 == 0:
            if not self.flip() or self.h < 1:
                return REJ
        self.fold_excursion(False)
        return OK

    # -- Schröder -------------------------------------------------------------------

    cdef int extend(self) except -1:
        cdef Py_ssize_t run = 0, pos
        cdef int o
        while True:
            self.ent += EXTEND_H_C
            o = self.interval2(self.r_tab, self.tr_tab)
            if o < 2:
                self.place_before_run(run, SD if o else SU)
                return OK
            pos = self.length - run - 1
            if pos < 0:
                return REJ
            if self.s[pos] != SF:
                self.flatten_at(pos)
                return OK
            self.reads += 1
            run += 1

    cdef int recover_schroeder(self) except -1:
        cdef Py_ssize_t m = self.geo_len(), i, steps
        cdef int r
        if not self.bernoulli_plan(_plan("slot", m)):
            self.replace_last(SF)
            return OK
        i = <Py_ssize_t> self.uniform_int(<uint64_t> m)
        steps = self.length
        if i < steps:
            self.unfold_at(i)
            return OK
        self.unfold_flat_from_right(i - steps + 1)
        r = self.extend()
        if r:
            return r
        if self.h < 2:
            return REJ
        self.push(SF)
        return OK

    cdef int approx(self, Py_ssize_t n) except -1:
        cdef int r
        while self.geo_len() < n:
            self.push(self.draw())
            if self.h == -1:
                r = self.recover_schroeder()
                if r:
                    return r
        if self.geo_len() == n + 1:
            self.truncate()
        return OK

    cdef int extend_at_least(self, long lo) except -1:
        cdef int r = self.extend()
        if r:
            return r
        return REJ if self.h < lo else OK

    cdef int schroeder_excursion(self, Py_ssize_t n) except -1:
        cdef int r = self.approx(n)
        if r:
            return r
        if self.geo_len() == n:
            r = self.extend_at_least(1)
            if r:
                return r
            self.fold_excursion(False)
        else:
            self.fold_excursion(True)
        return OK

    cdef int schroeder_positive(self, Py_ssize_t n) except -1:
        cdef int r
        if n % 2:
            r = self.approx(n)
            if r:
                return r
            if self.geo_len() == n - 1:
                return self.extend_at_least(1)
            return OK
        if self.bernoulli_plan(_plan("branch", n)):
            r = self.approx(n)
            if r:
                return r
            if self.geo_len() == n - 1:
                return self.extend_at_least(2)
            return OK
        return self.schroeder_excursion(n)

    cdef int little_excursion(self, Py_ssize_t n) except -1:
        cdef int r = self.schroeder_excursion(n)
        if r:
            return r
        if self.ffz >= 0:
            self.lift()
            self.push(SD)
        return OK

    cdef int little_positive(self, Py_ssize_t n) except -1:
        cdef int r
        if n % 2 == 0:
            r = self.schroeder_positive(n)
            if r:
                return r
            if self.ffz >= 0:
                self.lift()
                r = self.extend()
                if r:
                    return r
                if self.ffz >= 0:
                    return REJ
            return OK
        if n > 1:
            r = self.little_positive(n - 1)
            if r:
                return r
        r = self.extend()
        if r:
            return r
        if self.h == 1 and self.s[self.length - 1] == SF:
            return REJ
        if self.h == -1:
            if self.length < 2:
                return REJ
            self.collapse_dd()
        return OK

    cdef int florentine(self, Py_ssize_t n) except -1:
        while self.geo_len() < n:
            self.push(self.draw())
            if self.h < 0:
                return REJ
        if self.geo_len() == n + 1:
            self.truncate()
        return OK

    # -- driver -------------------------------------------------------------------------

    cdef int attempt(self, int code, Py_ssize_t n) except -1:
        if code == 1 or code == 3:
            return self.motzkin_positive(n)
        if code == 2 or code == 4:
            return self.motzkin_excursion(n)
        if code == 5:
            return self.approx(n)
        if code == 6:
            return self.schroeder_positive(n)
        if code == 7:
            return self.schroeder_excursion(n)
        if code == 8:
            return self.little_excursion(n)
        if code == 9:
            return self.little_positive(n)
        return self.florentine(n)

    cdef int run(self, int code, Py_ssize_t n) except -1:
        cdef long long before
        while True:
            before = self.reads + self.writes
            if self.attempt(code, n) == OK:
                return OK
            self.wasted += self.reads + self.writes - before
            self.length = 0
            self.h = self.flats = 0
            self.ffz = -1
            self.restarts += 1


cdef double LOG2_3_C = LOG2_3
cdef double SCHROEDER_H_C = SCHROEDER_STEP_ENTROPY
cdef double EXTEND_H_C = _EXTEND_ENTROPY


cdef Kernel _start(int code, Py_ssize_t n, object src, object c):
    cdef Kernel k = Kernel()
    k.setup(_CODE_MODEL[code], n + 2, c)
    k.rng = <bitgen_t*> PyCapsule_GetPointer(src.bit_generator.capsule, "BitGenerator")
    k.word = <uint64_t> src._word
    k.nleft = src._nleft
    k.ent = src.meter.model_entropy_bits
    k.phys = 0
    return k


cdef void _sync(Kernel k, object src):
    src._word = k.word
    src._nleft = k.nleft
    src.meter.model_entropy_bits = k.ent
    src.meter.physical_bits += k.phys


def run_stats(int code, Py_ssize_t n, src, c=None):
    """Run sampler ``code`` to completion; return ``(steps, geo_len, reads, writes, restarts, wasted)``."""
    cdef Kernel k = _start(code, n, src, c)
    with src.bit_generator.lock:
        try:
            k.run(code, n)
        finally:
            _sync(k, src)
    return k.length, k.geo_len(), k.reads, k.writes, k.restarts, k.wasted


def run_path(int code, Py_ssize_t n, src, c=None):
    """Run sampler ``code`` to completion and return the metered :class:`Path`."""
    cdef Kernel k = _start(code, n, src, c)
    with src.bit_generator.lock:
        try:
            k.run(code, n)
        finally:
            _sync(k, src)
    p = Path(_MODEL_OF[k.model])
    p.steps = list(k.s[:k.length].decode("ascii"))
    p.height = k.h
    p.flats = k.flats
    p.ffz = None if k.ffz < 0 else k.ffz
    p.reads = k.reads
    p.writes = k.writes
    p.restarts = k.restarts
    p.wasted = k.wasted
    return p
