from behave import given, when, then
from sympy.polys.domains import QQ

from Utility.stepHelpers import capture
from qhurwitz.partitions import (Partition, ProfileList, character, character_bruteforce, colength_contents,
                                 count_partitions, dim_irrep, euler_characteristic, partitions_of, z_mu)


@when('the partitions of {n:d} are enumerated')
def step_enumerate(context, n):
    context.n = n
    context.partitions = partitions_of(n)


@then('there are {count:d} partitions')
def step_partition_count(context, count):
    assert len(context.partitions) == count, f"got {len(context.partitions)}"
    assert len(set(context.partitions)) == count, "enumeration repeated a partition"


@then('the count agrees with the pentagonal recurrence')
def step_pentagonal(context):
    assert count_partitions(context.n) == len(context.partitions)


@given('the partition "{text}"')
def step_partition(context, text):
    context.partition = Partition.parse(text)


@then('its centralizer order is {z:d}')
def step_centralizer(context, z):
    assert z_mu(context.partition) == QQ(z), f"got {z_mu(context.partition)}"


@then('its irreducible dimension is {dim:d}')
def step_dimension(context, dim):
    assert dim_irrep(context.partition) == QQ(dim), f"got {dim_irrep(context.partition)}"


@then('the squared dimensions of the irreducibles of S_{n:d} sum to {total:d}')
def step_burnside(context, n, total):
    assert sum(dim_irrep(lam) ** 2 for lam in partitions_of(n)) == QQ(total)


@then('the character of "{lam}" on the class "{mu}" is {chi:d}')
def step_character(context, lam, mu, chi):
    value = character(Partition.parse(lam), Partition.parse(mu))
    assert value == QQ(chi), f"got {value}"


@then('every character of S_{n:d} matches the brute-force table')
def step_character_table(context, n):
    mismatches = [(str(lam), str(mu)) for lam in partitions_of(n) for mu in partitions_of(n)
                  if character(lam, mu) != character_bruteforce(lam, mu)]
    assert not mismatches, f"characters differ at {mismatches}"


@then('its colength is {colength:d} and its contents are "{contents}"')
def step_contents(context, colength, contents):
    found_colength, found_contents = colength_contents(context.partition)
    assert found_colength == colength, f"colength {found_colength}"
    wanted = sorted(int(c) for c in contents.split(","))
    assert sorted(found_contents) == wanted, f"contents {found_contents}"


@then('the Euler characteristic at N = {n:d} and d = {d:d} is {chi:d}')
def step_euler(context, n, d, chi):
    assert euler_characteristic(n, context.partition, d) == chi


@when('the profile list "{text}" is read')
def step_read_profiles(context, text):
    context.profiles = capture(context, lambda: ProfileList.parse(text))
