import numpy as np
def walpha(M,a):
    th=2*np.pi*(np.arange(M)+0.5)/M
    return np.abs(1-np.exp(1j*th))**(2*a)
def rho(w,N):
    M=len(w); c=np.fft.fft(w)/M  # c[k] coefficient of z^k
    g=lambda k: c[k%M]
    A=list(range(1,N+1)); B=list(range(-N,1))
    G1=np.array([[g(kj-ki) for kj in A] for ki in A])
    G2=np.array([[g(kj-ki) for kj in B] for ki in B])
    C=np.array([[g(kj-ki) for kj in B] for ki in A])
    def isq(G):
        e,v=np.linalg.eigh(G); m=e>1e-10*e.max()
        return (v[:,m]/np.sqrt(e[m]))@v[:,m].conj().T
    return np.linalg.norm(isq(G1)@C@isq(G2),2)
def conj(v):
    M=len(v); V=np.fft.fft(v); k=np.fft.fftfreq(M,1/M); m=-1j*np.sign(k); m[M//2]=0
    return np.real(np.fft.ifft(V*m))
def nehari(u,N):
    M=len(u); c=np.fft.fft(u)/M
    H=np.array([[c[(-(i+j))%M] for j in range(1,N+1)] for i in range(N)])
    return np.linalg.norm(H,2)
def a2(w):
    M=len(w); ww=np.concatenate([w,w]); wi=1/ww
    P=np.concatenate([[0],np.cumsum(ww)]); Q=np.concatenate([[0],np.cumsum(wi)])
    best=0; L=1
    while L<=M:
        s=np.arange(M); a=(P[s+L]-P[s])/L; b=(Q[s+L]-Q[s])/L
        best=max(best,(a*b).max()); L*=2
    return best
for a in [0.1,0.3,0.45,0.6,0.8]:
    w=walpha(512,a)
    psi=conj(np.log(w)); u=np.exp(-1j*psi)
    r=[rho(w,N) for N in (16,32,64)]
    h=[nehari(u,N) for N in (16,32,64)]
    A=[a2(walpha(M,a)) for M in (256,512,1024)]
    print(a, ["%.8f"%x for x in r], ["%.8f"%x for x in h], ["%.4f"%x for x in A], A[1]/A[0], A[2]/A[1])
