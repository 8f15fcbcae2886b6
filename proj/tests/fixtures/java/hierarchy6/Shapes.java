package geo;

import java.util.List;
import java.util.logging.Logger;

abstract class A {
    abstract double area();
}

class B extends A {
    private final Logger log;
    private List<A> parts;

    B(Logger log) {
        this.log = log;
    }

    double area() {
        log.info("area");
        return parts.size();
    }

    void add(A part) {
        parts.add(part);
        log.fine("added");
    }
}

class C extends B {
}

class D extends A {
    double area() {
        return 1.0;
    }
}

class E {
}

interface F {
}
