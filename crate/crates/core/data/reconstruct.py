import numpy as np
from scipy.optimize import fsolve
rng = np.random.default_rng(1985)
years = np.arange(1889, 1979)
n = 90
# raw log growth shocks 1889->1977 (88 values)
raw = rng.normal(0.0, 1.0, 88)
# historical episodes: 1893 panic, 1907, 1914, WWI, 1920-21, depression, WWII rationing, 1958
def idx(y): return y - 1889
ep = np.zeros(88)
for y, v in [(1893,-1.2),(1894,-0.8),(1907,-1.0),(1914,-1.0),(1917,-0.8),(1918,-0.6),(1920,-1.1),(1921,0.6),
             (1930,-1.6),(1931,-1.3),(1932,-2.0),(1933,0.3),(1934,1.0),(1936,1.2),(1938,-0.8),(1942,-1.0),(1943,-0.2),
             (1946,1.5),(1958,-0.4),(1974,-0.8)]:
    ep[idx(y)] += v
dip = np.zeros(88)
for y in range(1929, 1946): dip[idx(y)] = 0.0
shape = raw + ep
last_g = np.log(3450/3340)
target_mean, target_std = 1.018, 0.036
rho_r, rho_p = 1.033526, 1.0089
Eu_r = 6.192703/(0.99*0.961745)
def moments(c):
    lc = np.log(c); return lc.mean(), lc.var()
def Eu(mu, s2, rho):
    a = 1-rho; return (np.exp(a*mu + 0.5*a*a*s2)-1)/a
# tilt component to move mu_z: a smooth bump
t = np.arange(88)
bump = np.exp(-0.5*((t-45)/12)**2); bump -= bump.mean()
def build(p):
    shift, scale, amp = p
    g = shift + scale*shape + amp*bump
    g = np.append(g, last_g)
    lc = np.empty(90); lc[-1] = np.log(3450)
    for i in range(88, -1, -1): lc[i] = lc[i+1] - g[i]
    return g, np.exp(lc)
def eqs(p):
    g, c = build(p)
    x = np.exp(g)
    mu, s2 = moments(c)
    return [x.mean()-target_mean, x.std()-target_std, Eu(mu, s2, rho_r)-Eu_r]
p = fsolve(eqs, [0.017, 0.035, 0.0])
g, c = build(p)
c = np.round(c, 2)
c[-2] = 3340.0; c[-1] = 3450.0
x = c[1:]/c[:-1]
mu, s2 = moments(c)
print("params", p)
print("c1889", c[0], "meanx", x.mean(), "stdx", x.std(), "mu_z", mu, "s2_z", s2)
print("Eu_r", Eu(mu,s2,rho_r), "target", Eu_r)
cp = c.copy(); cp[-1] = 3430
mup, s2p = moments(cp)
print("Eu_p", Eu(mup,s2p,rho_p), "target", 6.762365/(0.99*0.9615), 7.168177/(0.99*1.0192))
for rho, eta, tgt, mm in [(rho_r,0.961745,6.192703,(mu,s2)),(rho_r,1.019392,6.563893,(mu,s2)),(rho_p,0.9615,6.762365,(mup,s2p)),(rho_p,1.0192,7.168177,(mup,s2p))]:
    print(0.99*eta*Eu(*mm, rho), tgt)
np.save("/tmp/c.npy", c)
print(c[:5], c[40:46])

lx = np.log(x); mu_x = lx.mean(); s2_x = lx.var()
gap = np.log(x.mean()) - mu_x - 0.5*s2_x
beta=0.99; zeta=0.961745; xi=1.019392; rho=rho_r
lnRf = -np.log(beta) - np.log(xi) + rho*mu_x - 0.5*rho**2*s2_x
lnRe = np.log(x.mean()) - np.log(beta) - np.log(zeta) - (1-rho)*mu_x - 0.5*(1-rho)**2*s2_x
print("mu_x", mu_x, "s2_x", s2_x, "gap", gap, "Rf", np.exp(lnRf), "Re", np.exp(lnRe))
rng2 = np.random.default_rng(1978)
def standardize(v, m, s):
    v = (v - v.mean())/v.std(); return m + s*v
# growth shocks feed equity returns partly
zg = (lx - lx.mean())/lx.std(); zg = np.append(zg, 0.0)
re = standardize(0.4*zg + rng2.normal(size=90), np.exp(lnRe), 0.165)
rf_raw = rng2.normal(size=90)
# wartime inflation makes real bill returns negative
for y in [1916,1917,1918,1919,1941,1942,1943,1944,1945,1946,1947,1974]:
    rf_raw[y-1889] -= 2.0
rf = standardize(rf_raw, np.exp(lnRf), 0.056)
re = np.round(re, 6); rf = np.round(rf, 6)
# re-centre the rounded series exactly on the target means
re[-1] += round(np.exp(lnRe)*90 - re.sum(), 6); rf[-1] += round(np.exp(lnRf)*90 - rf.sum(), 6)
print("min re", re.min(), "min rf", rf.min(), re.mean(), rf.mean())
with open("crates/core/data/mehra_prescott_1889_1978.csv","w") as f:
    f.write("year,consumption_per_capita,equity_gross_return,riskfree_gross_return\n")
    for i,yr in enumerate(years):
        f.write(f"{yr},{c[i]:.2f},{re[i]:.6f},{rf[i]:.6f}\n")
