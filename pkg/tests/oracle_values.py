"""Frozen oracle values; regenerate with tests/oracles/generate_oracles.py (mpmath, 40 digits)."""

RP_COV = {}
TRIWEIGHT_L2 = 0.81585081585081585082
YU_JONES_0_01 = 1.6936910407054930595
REMAINDER_B_STUDENT = -0.038506191524329732985
G_HALF = -0.2096837851751657227
T2_ISF_005 = 2.919985580353725687
RP_COV[(0.5, 3)] = [[6.30680499965352, -4.98004125930122, -1.7209060841140603e-26], [-4.98004125930122, 6.1915895275468396, 0.40792540792540793], [-1.72090608411406e-26, 0.40792540792540793, 0.8158508158508159]]
RP_COV[(0.5, 4)] = [[4.668248995729122, -5.130119041120536, 2.2618296758609196e-26], [-5.130119041120536, 8.698271760623287, 0.40792540792540793], [2.2618296758609187e-26, 0.40792540792540793, 0.8158508158508159]]
RP_COV[(-0.5, 3)] = [[3.7840829997921115, -3.089362275018703, -3.1197787003125834e-27], [-3.089362275018703, 3.1067477892471906, -0.40792540792540793], [-3.1197787003125985e-27, -0.40792540792540793, 0.8158508158508159]]
RP_COV[(-0.5, 4)] = [[2.145526995867715, -2.7105482805034296, -3.8699435278050596e-27], [-2.7105482805034296, 4.113922880558135, -0.40792540792540793], [-3.869943527805066e-27, -0.40792540792540793, 0.8158508158508159]]
RP_COV_RP2_J4 = [[7.653335218233398, -10.652784943630436, 1.889208782507996e-26], [-10.652784943630436, 18.912814346849018, 0.40792540792540793], [1.8892087825079957e-26, 0.40792540792540793, 0.8158508158508159]]
